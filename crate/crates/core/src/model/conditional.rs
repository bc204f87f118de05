use serde::{Deserialize, Serialize};

use super::likelihood::{add_weighted_exposure, check_dims};
use super::prior::PriorSpec;
use crate::data::RiskTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub shape: f64,
    pub rate: f64,
}

impl GammaParams {
    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }
}

/// Which baseline-hazard set a conditional refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HazardSet {
    /// `lambda`: current-data hazards (shared with history when pooled).
    Current,
    /// `lambda0`: historical hazards under unshared baselines.
    Historical,
}

/// Data terms `(events, weighted exposure)` for every cell of one hazard set.
pub(crate) fn data_terms(
    set: HazardSet,
    beta: &[f64],
    current: Option<&RiskTable>,
    historical: &[RiskTable],
    a0: &[f64],
    shared: bool,
    intervals: &[usize],
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut events: Vec<Vec<f64>> = intervals.iter().map(|&k| vec![0.0; k]).collect();
    let mut exposure = events.clone();
    let use_current = set == HazardSet::Current;
    let use_history = set == HazardSet::Historical || shared || current.is_none();
    if use_current {
        if let Some(rt) = current {
            add_events(rt, 1.0, &mut events);
            add_weighted_exposure(beta, rt, 1.0, &mut exposure);
        }
    }
    if use_history {
        for (rt, &a) in historical.iter().zip(a0) {
            if a > 0.0 {
                add_events(rt, a, &mut events);
                add_weighted_exposure(beta, rt, a, &mut exposure);
            }
        }
    }
    (events, exposure)
}

fn add_events(rt: &RiskTable, scale: f64, acc: &mut [Vec<f64>]) {
    for (row, counts) in acc.iter_mut().zip(rt.event_counts()) {
        for (a, e) in row.iter_mut().zip(counts) {
            *a += scale * e;
        }
    }
}

pub(crate) fn gamma_conditional(
    set: HazardSet,
    s: usize,
    k: usize,
    events: f64,
    exposure: f64,
    prior: &PriorSpec,
) -> Result<GammaParams> {
    let (hazard_prior, name) = match set {
        HazardSet::Current => (&prior.lambda, "lambda"),
        HazardSet::Historical => (&prior.lambda0, "lambda0"),
    };
    let (a, b) = hazard_prior.conjugate_terms(s, k).ok_or_else(|| {
        Error::config(
            format!("prior.{name}"),
            "the log-normal hazard prior has no Gamma full conditional",
        )
    })?;
    let shape = events + a;
    let rate = exposure + b;
    if !(shape > 0.0 && rate > 0.0 && rate.is_finite()) {
        return Err(Error::DegenerateConditional {
            param: name,
            stratum: s + 1,
            interval: k + 1,
            shape,
            rate,
        });
    }
    Ok(GammaParams { shape, rate })
}

/// Gamma full conditional of one baseline hazard.
///
/// * `Current`, unshared: `Gamma(sum_{G_s} nu_ik + a_sk, sum_{G_s} exp(x'beta) r_ik + b_sk)`.
/// * `Current`, shared (or no current data): the `a_0j`-weighted historical
///   sums are added to the current ones.
/// * `Historical`: `Gamma(p_sk, q_sk)` with
///   `p_sk = sum_j a_0j sum_{G_sj} nu_ik + c_sk`,
///   `q_sk = sum_j a_0j sum_{G_sj} exp(x'beta) r_ik + d_sk`.
///
/// The improper prior adds nothing; the log-normal prior is rejected.
#[allow(clippy::too_many_arguments)]
pub fn lambda_full_conditional(
    set: HazardSet,
    stratum: usize,
    interval: usize,
    beta: &[f64],
    current: Option<&RiskTable>,
    historical: &[RiskTable],
    a0: &[f64],
    prior: &PriorSpec,
) -> Result<GammaParams> {
    super::prior::validate_a0(a0, historical.len())?;
    let reference = current.or(historical.first()).ok_or_else(|| {
        Error::InvalidData("no data supplied for the hazard conditional".into())
    })?;
    for rt in current.into_iter().chain(historical) {
        check_dims(beta, rt)?;
    }
    let intervals = reference.interval_counts();
    if stratum >= intervals.len() || interval >= intervals[stratum] {
        return Err(Error::Domain(format!(
            "cell ({}, {}) outside the partition",
            stratum + 1,
            interval + 1
        )));
    }
    let (events, exposure) = data_terms(
        set,
        beta,
        current,
        historical,
        a0,
        prior.shared_baseline,
        intervals,
    );
    gamma_conditional(
        set,
        stratum,
        interval,
        events[stratum][interval],
        exposure[stratum][interval],
        prior,
    )
}
