//! Hypothetical trial generation: complete data per subject, then the
//! observed data at the event-driven analysis cutoff.

mod config;
mod trial;

pub use config::{Censoring, Dropout, Enrollment, TrialDesignConfig};
pub use trial::{
    construct_observed_data, sample_piecewise_exponential, simulate_complete_data, CompleteSubject, CovariatePool,
    ObservedTrial,
};
