use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// One multivariate normal component as written to and read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MvnComponent {
    pub mean: Vec<f64>,
    /// Row-major `P x P` covariance.
    pub covariance: Vec<Vec<f64>>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MixtureSpec {
    components: Vec<MvnComponent>,
}

#[derive(Debug, Clone, PartialEq)]
struct Factor {
    /// Lower Cholesky factor, row-major.
    chol: Vec<f64>,
    log_norm: f64,
}

/// Finite mixture of multivariate normals, used as the prior for `beta`
/// when the discounting parameter is random.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixtureSpec", into = "MixtureSpec")]
pub struct MvnMixture {
    components: Vec<MvnComponent>,
    factors: Vec<Factor>,
    dim: usize,
}

impl TryFrom<MixtureSpec> for MvnMixture {
    type Error = Error;

    fn try_from(spec: MixtureSpec) -> Result<Self> {
        MvnMixture::new(spec.components)
    }
}

impl From<MvnMixture> for MixtureSpec {
    fn from(m: MvnMixture) -> Self {
        MixtureSpec {
            components: m.components,
        }
    }
}

impl MvnMixture {
    /// Validates shapes, symmetry and positive definiteness; weights must be
    /// positive and sum to one within 1e-6 and are then renormalized.
    pub fn new(mut components: Vec<MvnComponent>) -> Result<Self> {
        let dim = components
            .first()
            .map(|c| c.mean.len())
            .ok_or_else(|| Error::Fitting("mixture has no components".into()))?;
        if dim == 0 {
            return Err(Error::Fitting("mixture components have zero dimension".into()));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if components.iter().any(|c| !(c.weight > 0.0)) || (total - 1.0).abs() > 1e-6 {
            return Err(Error::Fitting(format!(
                "mixture weights must be positive and sum to 1 (sum = {total})"
            )));
        }
        let mut factors = Vec::with_capacity(components.len());
        for (i, c) in components.iter_mut().enumerate() {
            c.weight /= total;
            if c.mean.len() != dim
                || c.covariance.len() != dim
                || c.covariance.iter().any(|r| r.len() != dim)
            {
                return Err(Error::Fitting(format!("component {i} has inconsistent dimensions")));
            }
            if c.mean.iter().chain(c.covariance.iter().flatten()).any(|v| !v.is_finite()) {
                return Err(Error::Fitting(format!("component {i} has non-finite entries")));
            }
            for a in 0..dim {
                for b in 0..a {
                    let (x, y) = (c.covariance[a][b], c.covariance[b][a]);
                    if (x - y).abs() > 1e-10 * x.abs().max(y.abs()).max(1.0) {
                        return Err(Error::Fitting(format!("component {i} covariance is not symmetric")));
                    }
                }
            }
            let m = DMatrix::from_fn(dim, dim, |a, b| c.covariance[a][b]);
            let chol = m.cholesky().ok_or_else(|| {
                Error::Fitting(format!("component {i} covariance is not positive definite"))
            })?;
            let l = chol.l();
            let log_det: f64 = 2.0 * (0..dim).map(|a| l[(a, a)].ln()).sum::<f64>();
            let flat = (0..dim * dim).map(|idx| l[(idx / dim, idx % dim)]).collect();
            factors.push(Factor {
                chol: flat,
                log_norm: c.weight.ln() - 0.5 * (dim as f64 * LN_2PI + log_det),
            });
        }
        Ok(Self {
            components,
            factors,
            dim,
        })
    }

    pub fn single(mean: Vec<f64>, covariance: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(vec![MvnComponent {
            mean,
            covariance,
            weight: 1.0,
        }])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[MvnComponent] {
        &self.components
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `log sum_c w_c N_P(beta; m_c, Sigma_c)` via log-sum-exp.
    pub fn log_density(&self, beta: &[f64]) -> f64 {
        debug_assert_eq!(beta.len(), self.dim);
        let d = self.dim;
        let mut z = vec![0.0; d];
        // streaming log-sum-exp
        let mut best = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for (c, f) in self.components.iter().zip(&self.factors) {
            // forward substitution L z = beta - mean
            let mut quad = 0.0;
            for a in 0..d {
                let mut acc = beta[a] - c.mean[a];
                for b in 0..a {
                    acc -= f.chol[a * d + b] * z[b];
                }
                z[a] = acc / f.chol[a * d + a];
                quad += z[a] * z[a];
            }
            let t = f.log_norm - 0.5 * quad;
            if t > best {
                sum = sum * (best - t).exp() + 1.0;
                best = t;
            } else {
                sum += (t - best).exp();
            }
        }
        best + sum.ln()
    }
}
