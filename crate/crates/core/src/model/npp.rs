use super::conditional::GammaParams;
use super::likelihood::{check_dims, dot, exp_clamped};
use super::prior::{validate_a0, HazardPrior, PriorSpec};
use crate::data::RiskTable;
use crate::error::{Error, Result};

/// Log kernel of `pi(beta | D_0, a_0)` after integrating out `lambda0`
/// analytically:
///
/// `sum_s sum_k -p_sk log q_sk + sum_j a_0j sum_i nu_0i x_0i'beta + sum_p log N(beta_p; mu_p, sigma_p^2)`
///
/// The dropped constant is `sum_sk [log Gamma(p_sk) + c_sk log d_sk - log Gamma(c_sk)]`,
/// which depends on `a_0` but not on `beta`.
#[derive(Debug, Clone)]
pub struct NppKernel<'a> {
    historical: &'a [RiskTable],
    a0: Vec<f64>,
    shape: Vec<Vec<f64>>,
    rate_prior: Vec<Vec<f64>>,
    shape_prior: Vec<Vec<f64>>,
    score: Vec<f64>,
    beta_prior: Vec<(f64, f64)>,
}

impl<'a> NppKernel<'a> {
    /// Requires normal initial priors on `beta` and Gamma priors on `lambda0`.
    pub fn new(historical: &'a [RiskTable], a0: &[f64], prior: &PriorSpec) -> Result<Self> {
        let first = historical
            .first()
            .ok_or_else(|| Error::config("data.historical", "at least one historical dataset is required"))?;
        let p = first.n_covariates();
        let intervals = first.interval_counts().to_vec();
        if historical
            .iter()
            .any(|rt| rt.n_covariates() != p || rt.interval_counts() != intervals.as_slice())
        {
            return Err(Error::InvalidData(
                "historical risk tables disagree on covariates or partition".into(),
            ));
        }
        prior.beta.validate(p)?;
        let beta_prior = (0..p)
            .map(|j| {
                prior.beta.normal_params(j).ok_or_else(|| {
                    Error::config(
                        "prior.beta",
                        "the normalized power prior requires normal initial priors on beta",
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let (shape_prior, rate_prior): (Vec<Vec<f64>>, Vec<Vec<f64>>) = match &prior.lambda0 {
            HazardPrior::Gamma { shape, rate } => intervals
                .iter()
                .enumerate()
                .map(|(s, &k)| ((0..k).map(|j| shape.get(s, j)).collect(), (0..k).map(|j| rate.get(s, j)).collect()))
                .unzip(),
            _ => {
                return Err(Error::config(
                    "prior.lambda0",
                    "the normalized power prior requires Gamma priors on lambda0",
                ))
            }
        };
        let mut kernel = Self {
            historical,
            a0: Vec::new(),
            shape: shape_prior.clone(),
            rate_prior,
            shape_prior,
            score: vec![0.0; p],
            beta_prior,
        };
        kernel.set_a0(a0)?;
        Ok(kernel)
    }

    /// Re-targets the kernel at a new discounting vector.
    pub fn set_a0(&mut self, a0: &[f64]) -> Result<()> {
        validate_a0(a0, self.historical.len())?;
        self.a0.clear();
        self.a0.extend_from_slice(a0);
        for (row, prior_row) in self.shape.iter_mut().zip(&self.shape_prior) {
            row.copy_from_slice(prior_row);
        }
        self.score.iter_mut().for_each(|v| *v = 0.0);
        for (rt, &a) in self.historical.iter().zip(a0) {
            for (row, counts) in self.shape.iter_mut().zip(rt.event_counts()) {
                for (p, e) in row.iter_mut().zip(counts) {
                    *p += a * e;
                }
            }
            for (sc, v) in self.score.iter_mut().zip(rt.event_covariate_sum()) {
                *sc += a * v;
            }
        }
        Ok(())
    }

    pub fn n_covariates(&self) -> usize {
        self.score.len()
    }

    pub fn a0(&self) -> &[f64] {
        &self.a0
    }

    /// `p_sk`.
    pub fn shapes(&self) -> &[Vec<f64>] {
        &self.shape
    }

    /// `q_sk` at `beta`.
    pub fn rates(&self, beta: &[f64]) -> Vec<Vec<f64>> {
        let mut q = self.rate_prior.clone();
        for (rt, &a) in self.historical.iter().zip(&self.a0) {
            if a > 0.0 {
                super::likelihood::add_weighted_exposure(beta, rt, a, &mut q);
            }
        }
        q
    }

    /// `Gamma(p_sk, q_sk)`: the conditional of `lambda0` given `beta` and `a_0`.
    pub fn lambda0_conditionals(&self, beta: &[f64]) -> Vec<Vec<GammaParams>> {
        self.shape
            .iter()
            .zip(self.rates(beta))
            .map(|(ps, qs)| {
                ps.iter()
                    .zip(qs)
                    .map(|(&shape, rate)| GammaParams { shape, rate })
                    .collect()
            })
            .collect()
    }

    pub fn log_density(&self, beta: &[f64]) -> Result<f64> {
        if beta.len() != self.score.len() {
            return Err(Error::Domain(format!(
                "beta has {} entries, expected {}",
                beta.len(),
                self.score.len()
            )));
        }
        let q = self.rates(beta);
        let mut total = dot(&self.score, beta);
        for (ps, qs) in self.shape.iter().zip(&q) {
            for (&p, &r) in ps.iter().zip(qs) {
                if !(r > 0.0) {
                    return Err(Error::Domain(format!("nonpositive Gamma rate q = {r}")));
                }
                total -= p * r.ln();
            }
        }
        for (&b, &(m, v)) in beta.iter().zip(&self.beta_prior) {
            total += super::prior::normal_logpdf(b, m, v);
        }
        Ok(total)
    }

    /// Analytic gradient in `beta`.
    pub fn gradient(&self, beta: &[f64]) -> Vec<f64> {
        let q = self.rates(beta);
        let mut grad = self.score.clone();
        for (rt, &a) in self.historical.iter().zip(&self.a0) {
            if a <= 0.0 {
                continue;
            }
            for g in rt.groups() {
                let w = a * exp_clamped(dot(&g.x, beta));
                let ratio: f64 = self.shape[g.stratum]
                    .iter()
                    .zip(&q[g.stratum])
                    .zip(&g.exposure)
                    .map(|((p, qv), r)| p / qv * r)
                    .sum();
                for (d, x) in grad.iter_mut().zip(&g.x) {
                    *d -= w * ratio * x;
                }
            }
        }
        for ((d, &b), &(m, v)) in grad.iter_mut().zip(beta).zip(&self.beta_prior) {
            *d -= (b - m) / v;
        }
        grad
    }
}

pub fn log_npp_beta_kernel(
    beta: &[f64],
    a0: &[f64],
    historical: &[RiskTable],
    prior: &PriorSpec,
) -> Result<f64> {
    for rt in historical {
        check_dims(beta, rt)?;
    }
    NppKernel::new(historical, a0, prior)?.log_density(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{build_risk_table, DatasetRole, IntervalPartition, SurvivalDataset};
    use crate::model::prior::BetaPrior;

    fn table() -> RiskTable {
        let d = SurvivalDataset::new(
            vec![0.5, 1.5, 2.0, 3.0, 0.7],
            vec![true, true, false, true, false],
            vec![0.0, 1.0, 0.0, 1.0, 1.0],
            1,
            vec![0, 0, 0, 0, 0],
            DatasetRole::Historical,
        )
        .unwrap();
        build_risk_table(&d, &IntervalPartition::new(vec![vec![1.0]]).unwrap()).unwrap()
    }

    #[test]
    fn zero_discount_is_initial_prior_plus_constant() {
        let prior = PriorSpec::default();
        let h = [table()];
        let k = |b: f64| log_npp_beta_kernel(&[b], &[0.0], &h, &prior).unwrap();
        let p = |b: f64| prior.beta.log_density(&[b]);
        let c = k(0.0) - p(0.0);
        for b in [-2.0, -0.3, 1.1, 4.0] {
            assert!((k(b) - p(b) - c).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_flat_beta_prior() {
        let prior = PriorSpec {
            beta: BetaPrior::Uniform,
            ..PriorSpec::default()
        };
        assert!(matches!(
            NppKernel::new(&[table()], &[0.5], &prior),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn rejects_improper_lambda0_prior() {
        let prior = PriorSpec {
            lambda0: HazardPrior::Improper,
            ..PriorSpec::default()
        };
        assert!(NppKernel::new(&[table()], &[0.5], &prior).is_err());
    }
}
