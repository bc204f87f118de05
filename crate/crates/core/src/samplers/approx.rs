use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use super::draws::SamplerConfig;
use super::slice::slice_sample_1d;
use crate::data::{build_risk_table, IntervalPartition, RiskTable, SurvivalDataset};
use crate::error::{Error, Result};
use crate::matrix::DrawMatrix;
use crate::model::{BetaHyper, MvnMixture, NppKernel, PriorSpec};
use crate::rng::{stream, Purpose};

/// Draws from the discounting prior of `beta` under a normalized power prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorApproximation {
    pub beta: DrawMatrix,
    /// The `a0` vector behind each retained `beta` row.
    pub a0: DrawMatrix,
}

/// For each of `n_draws` outer iterations, draws `a0 ~ prod_j Beta(u_j, v_j)`
/// and runs `cfg.n_burnin` slice sweeps of `beta` targeting the NPP kernel at
/// that `a0`, starting from the previously retained `beta`. The last state of
/// every inner chain is kept.
pub fn approximate_prior_beta(
    historical: &[SurvivalDataset],
    partition: &IntervalPartition,
    prior: &PriorSpec,
    hypers: &[BetaHyper],
    n_draws: usize,
    cfg: &SamplerConfig,
) -> Result<PriorApproximation> {
    let tables = historical
        .iter()
        .map(|d| build_risk_table(d, partition))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = stream(cfg.seed, 0, Purpose::Approximate);
    approximate_prior_beta_tables(&tables, prior, hypers, n_draws, cfg, &mut rng)
}

pub fn approximate_prior_beta_tables<R: Rng + ?Sized>(
    historical: &[RiskTable],
    prior: &PriorSpec,
    hypers: &[BetaHyper],
    n_draws: usize,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<PriorApproximation> {
    cfg.validate()?;
    if hypers.len() != historical.len() {
        return Err(Error::config(
            "prior.a0_beta",
            format!(
                "{} Beta hyperparameter pairs for {} historical datasets",
                hypers.len(),
                historical.len()
            ),
        ));
    }
    if n_draws < 2 {
        return Err(Error::config("sampler.n_mc", "the prior approximation needs at least two draws"));
    }
    if cfg.n_burnin == 0 {
        return Err(Error::config("sampler.n_burnin", "the prior approximation needs at least one inner sweep"));
    }
    let dists = hypers
        .iter()
        .map(|h| Beta::new(h.shape1, h.shape2).map_err(|e| Error::config("prior.a0_beta", e.to_string())))
        .collect::<Result<Vec<_>>>()?;

    let start: Vec<f64> = vec![0.5; historical.len()];
    let mut kernel = NppKernel::new(historical, &start, prior)?;
    let p = kernel.n_covariates();
    let params = cfg.beta_slice();

    let mut beta = vec![0.0; p];
    let mut a0 = start;
    let mut beta_draws = DrawMatrix::zeros(n_draws, p);
    let mut a0_draws = DrawMatrix::zeros(n_draws, historical.len());
    for l in 0..n_draws {
        for (a, d) in a0.iter_mut().zip(&dists) {
            *a = d.sample(rng);
        }
        kernel.set_a0(&a0)?;
        for _ in 0..cfg.n_burnin {
            for j in 0..p {
                let mut trial = beta.clone();
                let logf = |b: f64| {
                    trial[j] = b;
                    kernel.log_density(&trial).unwrap_or(f64::NAN)
                };
                beta[j] = slice_sample_1d(logf, beta[j], params, rng)
                    .map_err(|e| Error::Sampler(format!("outer draw {}, beta_{}: {e}", l + 1, j + 1)))?;
            }
        }
        beta_draws.row_mut(l).copy_from_slice(&beta);
        a0_draws.row_mut(l).copy_from_slice(&a0);
    }
    Ok(PriorApproximation {
        beta: beta_draws,
        a0: a0_draws,
    })
}

/// Single multivariate normal with the sample mean and covariance of `draws`.
pub fn fit_single_mvn(draws: &DrawMatrix) -> Result<MvnMixture> {
    let (n, p) = (draws.rows(), draws.cols());
    if n <= p {
        return Err(Error::Fitting(format!(
            "{n} draws cannot determine a {p}-dimensional covariance; increase the number of draws"
        )));
    }
    let mean = draws.column_means();
    let mut cov = vec![vec![0.0; p]; p];
    for i in 0..n {
        let row = draws.row(i);
        for a in 0..p {
            for b in 0..=a {
                cov[a][b] += (row[a] - mean[a]) * (row[b] - mean[b]);
            }
        }
    }
    for a in 0..p {
        for b in 0..=a {
            cov[a][b] /= (n - 1) as f64;
            cov[b][a] = cov[a][b];
        }
    }
    MvnMixture::single(mean, cov).map_err(|e| {
        Error::Fitting(format!("{e}; the draws are degenerate, increase the number of draws"))
    })
}
