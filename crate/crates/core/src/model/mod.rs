//! Likelihood, power-prior and normalized-power-prior kernels, and the
//! conjugate Gamma conditionals for baseline hazards.

mod conditional;
mod likelihood;
mod mixture;
mod npp;
mod prior;

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use conditional::{lambda_full_conditional, GammaParams, HazardSet};
pub(crate) use conditional::{data_terms, gamma_conditional};
pub use likelihood::{
    grad_log_likelihood, log_likelihood, log_power_prior_beta, take_clamp_events, weighted_exposure,
    LINEAR_PREDICTOR_LIMIT,
};
pub(crate) use likelihood::{dot, exp_clamped};
pub use mixture::{MvnComponent, MvnMixture};
pub use npp::{log_npp_beta_kernel, NppKernel};
pub use prior::{validate_a0, BetaHyper, BetaPrior, CellValues, HazardPrior, PriorSpec};

/// Per-stratum piecewise-constant hazards `lambda_sk > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineHazards(Vec<Vec<f64>>);

impl BaselineHazards {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(v) = values.iter().flatten().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Domain(format!("baseline hazard {v} is not positive")));
        }
        Ok(Self(values))
    }

    pub fn into_inner(self) -> Vec<Vec<f64>> {
        self.0
    }
}

impl Deref for BaselineHazards {
    type Target = [Vec<f64>];

    fn deref(&self) -> &Self::Target {
        &self.0
    }
}
