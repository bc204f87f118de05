use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::SamplingPrior;
use crate::data::{build_risk_table, default_partition, IntervalPartition, SurvivalDataset};
use crate::error::{Error, Result};
use crate::model::{validate_a0, MvnMixture, PriorSpec};
use crate::rng::{stream, Purpose};
use crate::samplers::{phm_fixed_a0_tables, phm_random_a0_tables, SamplerConfig};
use crate::sim::{construct_observed_data, simulate_complete_data, CovariatePool, TrialDesignConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullDirection {
    /// `H0: beta_1 >= delta`, rejected when `P(beta_1 < delta | data) >= gamma`.
    #[default]
    GreaterEqual,
    /// `H0: beta_1 <= delta`, rejected when `P(beta_1 > delta | data) >= gamma`.
    LessEqual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HypothesisSpec {
    pub delta: f64,
    pub null: NullDirection,
    pub gamma: f64,
}

impl Default for HypothesisSpec {
    fn default() -> Self {
        Self {
            delta: 0.0,
            null: NullDirection::GreaterEqual,
            gamma: 0.975,
        }
    }
}

impl HypothesisSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::config("hypothesis.gamma", format!("must lie in (0, 1), got {}", self.gamma)));
        }
        if !self.delta.is_finite() {
            return Err(Error::config("hypothesis.delta", "must be finite"));
        }
        Ok(())
    }

    /// Posterior probability of the alternative from draws of `beta_1`.
    pub fn posterior_probability(&self, beta1: impl Iterator<Item = f64>) -> f64 {
        let (mut hits, mut n) = (0usize, 0usize);
        for b in beta1 {
            n += 1;
            let alt = match self.null {
                NullDirection::GreaterEqual => b < self.delta,
                NullDirection::LessEqual => b > self.delta,
            };
            hits += alt as usize;
        }
        hits as f64 / n as f64
    }
}

/// How the discounting parameter enters each fitted trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum A0Mode {
    Fixed { a0: Vec<f64> },
    Random { mixture: MvnMixture },
}

/// Partition used when fitting each simulated trial.
#[derive(Debug, Clone, PartialEq)]
pub enum FitPartition {
    /// Recomputed per trial from the pooled simulated and historical event
    /// times with the given interval count per stratum.
    Pooled(Vec<usize>),
    Fixed(IntervalPartition),
}

/// Everything needed to estimate one operating characteristic.
#[derive(Debug, Clone)]
pub struct DesignProblem {
    pub historical: Vec<SurvivalDataset>,
    pub a0: A0Mode,
    pub trial: TrialDesignConfig,
    pub sampling: SamplingPrior,
    pub hypothesis: HypothesisSpec,
    /// Partition the sampling-prior hazards refer to.
    pub generation_partition: IntervalPartition,
    pub fit_partition: FitPartition,
    pub prior: PriorSpec,
    /// Per-trial MCMC settings; its seed is the master seed of the run.
    pub sampler: SamplerConfig,
    pub n_trials: usize,
    /// Largest tolerated fraction of failed trials.
    pub max_failure_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: u64,
    pub probability: f64,
    pub reject: bool,
    pub cutoff: f64,
    pub n_subjects: usize,
    pub n_events: usize,
    pub generating_beta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub index: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    /// Mean rejection indicator over completed trials.
    pub estimate: f64,
    pub mc_se: f64,
    pub n_trials: usize,
    pub n_completed: usize,
    pub seed: u64,
    pub trials: Vec<TrialRecord>,
    pub failures: Vec<TrialFailure>,
}

impl DesignResult {
    pub fn indicators(&self) -> impl Iterator<Item = bool> + '_ {
        self.trials.iter().map(|t| t.reject)
    }
}

impl DesignProblem {
    fn validate(&self) -> Result<CovariatePool> {
        if self.n_trials == 0 {
            return Err(Error::config("design.n_trials", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.max_failure_rate) {
            return Err(Error::config("design.max_failure_rate", "must lie in [0, 1]"));
        }
        self.trial.validate()?;
        self.hypothesis.validate()?;
        self.sampler.validate()?;
        let pool = CovariatePool::from_datasets(&self.historical)?;
        let p = self.sampling.n_covariates();
        if !self.historical.is_empty() && p != pool.n_covariates() {
            return Err(Error::config(
                "sampling_prior.beta",
                format!("{p} columns but the historical data have {} covariates", pool.n_covariates()),
            ));
        }
        if self.sampling.interval_counts() != self.generation_partition.interval_counts() {
            return Err(Error::config(
                "sampling_prior.lambda",
                "hazard columns do not match the generation partition",
            ));
        }
        let intervals = match &self.fit_partition {
            FitPartition::Pooled(k) => k.clone(),
            FitPartition::Fixed(part) => part.interval_counts(),
        };
        if intervals.len() != self.generation_partition.n_strata() {
            return Err(Error::config(
                "partition.intervals",
                "fitting and generation partitions disagree on the number of strata",
            ));
        }
        match &self.a0 {
            A0Mode::Fixed { a0 } => {
                validate_a0(a0, self.historical.len())?;
                self.prior.validate(p, &intervals)?;
            }
            A0Mode::Random { mixture } => {
                if self.prior.shared_baseline {
                    return Err(Error::config(
                        "prior.shared_baseline",
                        "random a0 supports unshared baseline hazards only",
                    ));
                }
                if mixture.dim() != p {
                    return Err(Error::config(
                        "mixture",
                        format!("mixture dimension {} differs from {p} covariates", mixture.dim()),
                    ));
                }
                self.prior.lambda.validate("prior.lambda", &intervals)?;
            }
        }
        Ok(pool)
    }

    fn run_trial(&self, pool: &CovariatePool, index: u64) -> Result<TrialRecord> {
        let mut gen = stream(self.sampler.seed, index, Purpose::Generate);
        let (beta, lambda) = self.sampling.draw(&mut gen);
        let complete =
            simulate_complete_data(&self.trial, &beta, &lambda, pool, &self.generation_partition, &mut gen)?;
        let observed = construct_observed_data(&complete, self.trial.target_events, self.trial.t_min, self.trial.t_max)?;
        let current = &observed.data;

        let pooled;
        let partition = match &self.fit_partition {
            FitPartition::Fixed(p) => p,
            FitPartition::Pooled(k) => {
                let all: Vec<&SurvivalDataset> = std::iter::once(current).chain(&self.historical).collect();
                pooled = default_partition(&all, k)?;
                &pooled
            }
        };
        let cur_table = build_risk_table(current, partition)?;
        let mut fit = stream(self.sampler.seed, index, Purpose::Fit);
        let draws = match &self.a0 {
            A0Mode::Fixed { a0 } => {
                let hist = self
                    .historical
                    .iter()
                    .map(|d| build_risk_table(d, partition))
                    .collect::<Result<Vec<_>>>()?;
                phm_fixed_a0_tables(Some(&cur_table), &hist, a0, &self.prior, &self.sampler, &mut fit)?
            }
            A0Mode::Random { mixture } => {
                phm_random_a0_tables(&cur_table, mixture, &self.prior, &self.sampler, &mut fit)?
            }
        };
        let probability = self.hypothesis.posterior_probability(draws.beta.column(0));
        Ok(TrialRecord {
            index,
            probability,
            reject: probability >= self.hypothesis.gamma,
            cutoff: observed.cutoff,
            n_subjects: current.len(),
            n_events: current.n_events(),
            generating_beta: beta,
        })
    }
}

/// Simulates `n_trials` trials on `workers` threads and estimates the
/// probability that the posterior rejects the null.
///
/// Each trial's data and fit use streams keyed by the trial index, so the
/// result does not depend on `workers`, and runs that differ only in the
/// fitting prior see identical simulated data.
pub fn estimate_operating_characteristic(problem: &DesignProblem, workers: usize) -> Result<DesignResult> {
    let pool = problem.validate()?;
    let threads = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    let outcomes: Vec<Result<TrialRecord>> = threads.install(|| {
        (0..problem.n_trials as u64)
            .into_par_iter()
            .map(|b| problem.run_trial(&pool, b))
            .collect()
    });

    let mut trials = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for (index, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(t) => trials.push(t),
            Err(e) => failures.push(TrialFailure {
                index: index as u64,
                message: e.to_string(),
            }),
        }
    }
    let limit = (problem.max_failure_rate * problem.n_trials as f64).floor() as usize;
    if failures.len() > limit || trials.is_empty() {
        for f in &failures {
            log::error!("trial {} failed: {}", f.index, f.message);
        }
        return Err(Error::DesignAborted {
            failed: failures.len(),
            trials: problem.n_trials,
            limit,
            seed: problem.sampler.seed,
            indices: failures.iter().map(|f| f.index).collect(),
        });
    }
    for f in &failures {
        log::warn!("trial {} failed and is excluded: {}", f.index, f.message);
    }
    let n = trials.len();
    let estimate = trials.iter().filter(|t| t.reject).count() as f64 / n as f64;
    Ok(DesignResult {
        estimate,
        mc_se: (estimate * (1.0 - estimate) / n as f64).sqrt(),
        n_trials: problem.n_trials,
        n_completed: n,
        seed: problem.sampler.seed,
        trials,
        failures,
    })
}
