//! Simulation-based Bayesian sample-size determination.

mod decide;
mod engine;
mod sampling;

pub use decide::{decide_sample_size, Constraint, SampleSizeDecision};
pub use engine::{
    estimate_operating_characteristic, A0Mode, DesignProblem, DesignResult, FitPartition, HypothesisSpec,
    NullDirection, TrialFailure, TrialRecord,
};
pub use sampling::{build_default_sampling_priors, build_point_mass_prior, DefaultSamplingPriors, Resampling, SamplingPrior};
