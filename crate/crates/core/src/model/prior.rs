use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

pub(crate) fn normal_logpdf(x: f64, mean: f64, variance: f64) -> f64 {
    let d = x - mean;
    -0.5 * (LN_2PI + variance.ln() + d * d / variance)
}

/// Hyperparameter that is either shared by every coefficient/cell or given
/// individually. Single-element vectors broadcast.
fn broadcast(v: &[f64], i: usize) -> f64 {
    if v.len() == 1 {
        v[0]
    } else {
        v[i]
    }
}

/// Initial prior `pi_0(beta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BetaPrior {
    /// Improper flat prior.
    Uniform,
    /// Independent `N(mean_p, variance_p)`; length-1 vectors apply to all p.
    Normal { mean: Vec<f64>, variance: Vec<f64> },
}

impl Default for BetaPrior {
    fn default() -> Self {
        BetaPrior::Normal {
            mean: vec![0.0],
            variance: vec![1e3],
        }
    }
}

impl BetaPrior {
    pub fn validate(&self, p: usize) -> Result<()> {
        if let BetaPrior::Normal { mean, variance } = self {
            for (name, v) in [("mean", mean), ("variance", variance)] {
                if v.len() != 1 && v.len() != p {
                    return Err(Error::config(
                        format!("prior.beta.{name}"),
                        format!("expected 1 or {p} values, got {}", v.len()),
                    ));
                }
            }
            if variance.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(Error::config("prior.beta.variance", "variances must be positive"));
            }
        }
        Ok(())
    }

    /// Log density contribution of coordinate `p` (zero for the flat prior).
    pub fn log_density_coord(&self, p: usize, b: f64) -> f64 {
        match self {
            BetaPrior::Uniform => 0.0,
            BetaPrior::Normal { mean, variance } => {
                normal_logpdf(b, broadcast(mean, p), broadcast(variance, p))
            }
        }
    }

    pub fn log_density(&self, beta: &[f64]) -> f64 {
        beta.iter()
            .enumerate()
            .map(|(p, &b)| self.log_density_coord(p, b))
            .sum()
    }

    pub fn normal_params(&self, p: usize) -> Option<(f64, f64)> {
        match self {
            BetaPrior::Uniform => None,
            BetaPrior::Normal { mean, variance } => Some((broadcast(mean, p), broadcast(variance, p))),
        }
    }
}

/// A per-(stratum, interval) hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellValues {
    Constant(f64),
    PerCell(Vec<Vec<f64>>),
}

impl CellValues {
    pub fn get(&self, s: usize, k: usize) -> f64 {
        match self {
            CellValues::Constant(v) => *v,
            CellValues::PerCell(t) => t[s][k],
        }
    }

    fn validate(&self, path: &str, intervals: &[usize], positive: bool) -> Result<()> {
        if let CellValues::PerCell(t) = self {
            let shape_ok = t.len() == intervals.len()
                && t.iter().zip(intervals).all(|(row, &k)| row.len() == k);
            if !shape_ok {
                return Err(Error::config(
                    path,
                    format!("per-cell values must match interval counts {intervals:?}"),
                ));
            }
        }
        let bad = match self {
            CellValues::Constant(v) => !v.is_finite() || (positive && *v <= 0.0),
            CellValues::PerCell(t) => t
                .iter()
                .flatten()
                .any(|v| !v.is_finite() || (positive && *v <= 0.0)),
        };
        if bad {
            return Err(Error::config(path, "hyperparameters must be finite and positive"));
        }
        Ok(())
    }
}

/// Prior on the baseline hazards of one set (`lambda` or `lambda0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HazardPrior {
    /// Independent `Gamma(shape, rate)`.
    Gamma { shape: CellValues, rate: CellValues },
    /// Independent normal priors on `log(lambda_sk)`.
    LogNormal { mean: CellValues, variance: CellValues },
    /// `pi(lambda) ~ prod lambda_sk^-1`.
    Improper,
}

impl Default for HazardPrior {
    fn default() -> Self {
        HazardPrior::Gamma {
            shape: CellValues::Constant(1e-5),
            rate: CellValues::Constant(1e-5),
        }
    }
}

impl HazardPrior {
    pub fn validate(&self, path: &str, intervals: &[usize]) -> Result<()> {
        match self {
            HazardPrior::Gamma { shape, rate } => {
                shape.validate(&format!("{path}.shape"), intervals, true)?;
                rate.validate(&format!("{path}.rate"), intervals, true)
            }
            HazardPrior::LogNormal { mean, variance } => {
                mean.validate(&format!("{path}.mean"), intervals, false)?;
                variance.validate(&format!("{path}.variance"), intervals, true)
            }
            HazardPrior::Improper => Ok(()),
        }
    }

    /// `(shape, rate)` added to the data terms of the Gamma full
    /// conditional, or `None` when the prior is not conjugate.
    pub fn conjugate_terms(&self, s: usize, k: usize) -> Option<(f64, f64)> {
        match self {
            HazardPrior::Gamma { shape, rate } => Some((shape.get(s, k), rate.get(s, k))),
            HazardPrior::Improper => Some((0.0, 0.0)),
            HazardPrior::LogNormal { .. } => None,
        }
    }

    /// Log prior density of `eta = log(lambda)`, including the Jacobian.
    pub fn log_density_log_scale(&self, s: usize, k: usize, eta: f64) -> f64 {
        match self {
            HazardPrior::Gamma { shape, rate } => shape.get(s, k) * eta - rate.get(s, k) * eta.exp(),
            HazardPrior::LogNormal { mean, variance } => {
                normal_logpdf(eta, mean.get(s, k), variance.get(s, k))
            }
            HazardPrior::Improper => 0.0,
        }
    }
}

/// Fitting priors shared by the fixed- and random-discounting samplers.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSpec {
    #[serde(default)]
    pub beta: BetaPrior,
    #[serde(default)]
    pub lambda: HazardPrior,
    #[serde(default)]
    pub lambda0: HazardPrior,
    /// Current and historical data share one set of baseline hazards.
    #[serde(default)]
    pub shared_baseline: bool,
}

impl PriorSpec {
    pub fn validate(&self, p: usize, intervals: &[usize]) -> Result<()> {
        self.beta.validate(p)?;
        self.lambda.validate("prior.lambda", intervals)?;
        self.lambda0.validate("prior.lambda0", intervals)
    }
}

/// Independent `Beta(shape1, shape2)` priors on each `a_0j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaHyper {
    pub shape1: f64,
    pub shape2: f64,
}

impl BetaHyper {
    pub fn new(shape1: f64, shape2: f64) -> Result<Self> {
        if !(shape1 > 0.0 && shape2 > 0.0 && shape1.is_finite() && shape2.is_finite()) {
            return Err(Error::config("a0", "Beta shape parameters must be positive"));
        }
        Ok(Self { shape1, shape2 })
    }
}

pub fn validate_a0(a0: &[f64], n_historical: usize) -> Result<()> {
    if a0.len() != n_historical {
        return Err(Error::config(
            "a0",
            format!("{} discounting values for {n_historical} historical datasets", a0.len()),
        ));
    }
    if let Some(v) = a0.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Domain(format!("a0 value {v} outside [0, 1]")));
    }
    Ok(())
}
