use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{build_risk_table, IntervalPartition, SurvivalDataset};
use crate::error::{Error, Result};
use crate::matrix::DrawMatrix;
use crate::model::PriorSpec;
use crate::rng::{stream, Purpose};
use crate::samplers::{phm_fixed_a0_tables, PosteriorDraws, SamplerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resampling {
    /// One row index shared by `beta` and every stratum of `lambda`.
    Joint,
    /// Independent row indices for `beta` and for each stratum.
    Independent,
}

/// Discrete sampling prior for the generating parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPrior {
    beta: DrawMatrix,
    lambda: Vec<DrawMatrix>,
    resampling: Resampling,
}

impl SamplingPrior {
    pub fn new(beta: DrawMatrix, lambda: Vec<DrawMatrix>, resampling: Resampling) -> Result<Self> {
        if beta.rows() == 0 || beta.cols() == 0 {
            return Err(Error::config("sampling_prior.beta", "needs at least one row and one column"));
        }
        if lambda.is_empty() || lambda.iter().any(|m| m.rows() == 0 || m.cols() == 0) {
            return Err(Error::config(
                "sampling_prior.lambda",
                "needs at least one row and one column per stratum",
            ));
        }
        if let Some(v) = lambda.iter().flat_map(|m| m.as_slice()).find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::config("sampling_prior.lambda", format!("hazard {v} is not positive")));
        }
        if beta.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::config("sampling_prior.beta", "non-finite entry"));
        }
        if resampling == Resampling::Joint && lambda.iter().any(|m| m.rows() != beta.rows()) {
            return Err(Error::config(
                "sampling_prior.resampling",
                "joint resampling needs equal row counts for beta and every lambda matrix",
            ));
        }
        Ok(Self {
            beta,
            lambda,
            resampling,
        })
    }

    pub fn beta(&self) -> &DrawMatrix {
        &self.beta
    }

    pub fn lambda(&self) -> &[DrawMatrix] {
        &self.lambda
    }

    pub fn resampling(&self) -> Resampling {
        self.resampling
    }

    pub fn n_covariates(&self) -> usize {
        self.beta.cols()
    }

    pub fn interval_counts(&self) -> Vec<usize> {
        self.lambda.iter().map(|m| m.cols()).collect()
    }

    /// Draws one `(beta, lambda)` with replacement.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Vec<Vec<f64>>) {
        match self.resampling {
            Resampling::Joint => {
                let i = rng.random_range(0..self.beta.rows());
                (
                    self.beta.row(i).to_vec(),
                    self.lambda.iter().map(|m| m.row(i).to_vec()).collect(),
                )
            }
            Resampling::Independent => {
                let beta = self.beta.row(rng.random_range(0..self.beta.rows())).to_vec();
                let lambda = self
                    .lambda
                    .iter()
                    .map(|m| m.row(rng.random_range(0..m.rows())).to_vec())
                    .collect();
                (beta, lambda)
            }
        }
    }
}

/// One-row sampling prior at a fixed `(beta, lambda)`.
pub fn build_point_mass_prior(beta: &[f64], lambda: &[Vec<f64>]) -> Result<SamplingPrior> {
    let b = DrawMatrix::from_rows(&[beta.to_vec()])?;
    let l = lambda
        .iter()
        .map(|v| DrawMatrix::from_rows(std::slice::from_ref(v)))
        .collect::<Result<Vec<_>>>()?;
    SamplingPrior::new(b, l, Resampling::Joint)
}

/// Default null and alternative sampling priors built from the posterior
/// given the historical data alone at full borrowing.
#[derive(Debug, Clone, PartialEq)]
pub struct DefaultSamplingPriors {
    /// Rows with `beta_1 > 0`.
    pub null: SamplingPrior,
    /// Rows with `beta_1 < 0`.
    pub alternative: SamplingPrior,
    pub posterior: PosteriorDraws,
}

pub fn build_default_sampling_priors(
    historical: &[SurvivalDataset],
    partition: &IntervalPartition,
    prior: &PriorSpec,
    cfg: &SamplerConfig,
) -> Result<DefaultSamplingPriors> {
    if historical.is_empty() {
        return Err(Error::config("data.historical", "default sampling priors need historical data"));
    }
    let tables = historical
        .iter()
        .map(|d| build_risk_table(d, partition))
        .collect::<Result<Vec<_>>>()?;
    let a0 = vec![1.0; historical.len()];
    let mut rng = stream(cfg.seed, 0, Purpose::Elicit);
    let posterior = phm_fixed_a0_tables(None, &tables, &a0, prior, cfg, &mut rng)?;
    let side = |keep: fn(f64) -> bool, name: &str| -> Result<SamplingPrior> {
        let (beta, idx) = posterior.beta.select_rows(|r| keep(r[0]));
        if idx.is_empty() {
            return Err(Error::Elicitation(format!(
                "no historical posterior draws with beta_1 {name} 0; nMC may need to be larger"
            )));
        }
        let lambda = posterior.lambda.iter().map(|m| m.take_rows(&idx)).collect();
        SamplingPrior::new(beta, lambda, Resampling::Joint)
    };
    Ok(DefaultSamplingPriors {
        null: side(|b| b > 0.0, ">")?,
        alternative: side(|b| b < 0.0, "<")?,
        posterior,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_returns_itself() {
        let p = build_point_mass_prior(&[-0.27], &[vec![0.5, 0.6], vec![1.0]]).unwrap();
        let mut rng = stream(1, 0, Purpose::Generate);
        for _ in 0..5 {
            let (b, l) = p.draw(&mut rng);
            assert_eq!(b, vec![-0.27]);
            assert_eq!(l, vec![vec![0.5, 0.6], vec![1.0]]);
        }
    }

    #[test]
    fn joint_needs_aligned_rows() {
        let b = DrawMatrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let l = vec![DrawMatrix::from_rows(&[vec![1.0]]).unwrap()];
        assert!(SamplingPrior::new(b.clone(), l.clone(), Resampling::Joint).is_err());
        assert!(SamplingPrior::new(b, l, Resampling::Independent).is_ok());
    }

    #[test]
    fn joint_keeps_rows_together() {
        let b = DrawMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let l = vec![DrawMatrix::from_rows(&[vec![10.0], vec![11.0], vec![12.0]]).unwrap()];
        let p = SamplingPrior::new(b, l, Resampling::Joint).unwrap();
        let mut rng = stream(2, 0, Purpose::Generate);
        for _ in 0..20 {
            let (b, l) = p.draw(&mut rng);
            assert_eq!(l[0][0], b[0] + 10.0);
        }
    }
}
