use std::cell::Cell;

use super::prior::PriorSpec;
use super::BaselineHazards;
use crate::data::RiskTable;
use crate::error::{Error, Result};

/// Linear predictors beyond this magnitude are clamped before `exp`.
pub const LINEAR_PREDICTOR_LIMIT: f64 = 700.0;

thread_local! {
    static CLAMP_EVENTS: Cell<u64> = const { Cell::new(0) };
}

/// Number of clamped linear predictors on this thread since the last call.
pub fn take_clamp_events() -> u64 {
    CLAMP_EVENTS.with(|c| c.replace(0))
}

#[inline]
pub(crate) fn exp_clamped(eta: f64) -> f64 {
    if eta.abs() > LINEAR_PREDICTOR_LIMIT {
        CLAMP_EVENTS.with(|c| c.set(c.get() + 1));
        eta.clamp(-LINEAR_PREDICTOR_LIMIT, LINEAR_PREDICTOR_LIMIT).exp()
    } else {
        eta.exp()
    }
}

#[inline]
pub(crate) fn dot(x: &[f64], beta: &[f64]) -> f64 {
    x.iter().zip(beta).map(|(a, b)| a * b).sum()
}

pub(crate) fn check_dims(beta: &[f64], rt: &RiskTable) -> Result<()> {
    if beta.len() != rt.n_covariates() {
        return Err(Error::Domain(format!(
            "beta has {} entries but the data have {} covariates",
            beta.len(),
            rt.n_covariates()
        )));
    }
    Ok(())
}

fn check_hazards(lambda: &BaselineHazards, rt: &RiskTable) -> Result<()> {
    let ok = lambda.len() == rt.n_strata()
        && lambda
            .iter()
            .zip(rt.interval_counts())
            .all(|(row, &k)| row.len() == k);
    if !ok {
        return Err(Error::Domain(format!(
            "hazard layout does not match interval counts {:?}",
            rt.interval_counts()
        )));
    }
    Ok(())
}

/// `sum_{i in G_s} exp(x_i'beta) r_ik` for every stratum and interval.
pub fn weighted_exposure(beta: &[f64], rt: &RiskTable) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = rt.interval_counts().iter().map(|&k| vec![0.0; k]).collect();
    add_weighted_exposure(beta, rt, 1.0, &mut out);
    out
}

pub(crate) fn add_weighted_exposure(beta: &[f64], rt: &RiskTable, scale: f64, acc: &mut [Vec<f64>]) {
    for g in rt.groups() {
        let w = scale * exp_clamped(dot(&g.x, beta));
        for (a, r) in acc[g.stratum].iter_mut().zip(&g.exposure) {
            *a += w * r;
        }
    }
}

/// Piecewise-exponential proportional-hazards log-likelihood in the
/// interval-decomposed form:
///
/// `sum_s sum_k [E_sk log(lambda_sk) - lambda_sk sum_{i in G_s} exp(x_i'beta) r_ik] + sum_i nu_i x_i'beta`
///
/// Cells with no events contribute no `log(lambda)` term. No constant is
/// dropped beyond the proportionality of the likelihood itself.
pub fn log_likelihood(beta: &[f64], lambda: &BaselineHazards, rt: &RiskTable) -> Result<f64> {
    check_dims(beta, rt)?;
    check_hazards(lambda, rt)?;
    Ok(log_likelihood_unchecked(beta, lambda, rt))
}

pub(crate) fn log_likelihood_unchecked(beta: &[f64], lambda: &[Vec<f64>], rt: &RiskTable) -> f64 {
    let mut ll = dot(rt.event_covariate_sum(), beta);
    for (s, counts) in rt.event_counts().iter().enumerate() {
        for (k, &e) in counts.iter().enumerate() {
            if e > 0.0 {
                ll += e * lambda[s][k].ln();
            }
        }
    }
    for g in rt.groups() {
        let w = exp_clamped(dot(&g.x, beta));
        let lam = &lambda[g.stratum];
        let cum: f64 = lam.iter().zip(&g.exposure).map(|(l, r)| l * r).sum();
        ll -= w * cum;
    }
    ll
}

/// Gradient of [`log_likelihood`] in `beta`:
/// `sum_i nu_i x_i - sum_i x_i exp(x_i'beta) sum_k lambda_sk r_ik`.
pub fn grad_log_likelihood(beta: &[f64], lambda: &BaselineHazards, rt: &RiskTable) -> Result<Vec<f64>> {
    check_dims(beta, rt)?;
    check_hazards(lambda, rt)?;
    let mut grad = rt.event_covariate_sum().to_vec();
    for g in rt.groups() {
        let w = exp_clamped(dot(&g.x, beta));
        let cum: f64 = lambda[g.stratum].iter().zip(&g.exposure).map(|(l, r)| l * r).sum();
        for (d, x) in grad.iter_mut().zip(&g.x) {
            *d -= x * w * cum;
        }
    }
    Ok(grad)
}

/// Power prior for `beta` with fixed discounting:
/// `sum_j a_0j * log L(beta, lambda0 | D_0j) + log pi_0(beta)`.
///
/// The `lambda0` terms are kept so the same value serves the `lambda0`
/// conditional. Datasets with `a_0j = 0` contribute nothing.
pub fn log_power_prior_beta(
    beta: &[f64],
    lambda0: &BaselineHazards,
    historical: &[RiskTable],
    a0: &[f64],
    prior: &PriorSpec,
) -> Result<f64> {
    super::prior::validate_a0(a0, historical.len())?;
    let mut total = prior.beta.log_density(beta);
    for (rt, &a) in historical.iter().zip(a0) {
        check_dims(beta, rt)?;
        check_hazards(lambda0, rt)?;
        if a > 0.0 {
            total += a * log_likelihood_unchecked(beta, lambda0, rt);
        }
    }
    Ok(total)
}
