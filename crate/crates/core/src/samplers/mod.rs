//! Slice-within-Gibbs samplers for fixed and random `a0`, and the
//! approximation of the discounting prior on `beta`.

mod approx;
mod draws;
mod gibbs;
mod phm;
mod slice;

pub use approx::{approximate_prior_beta, approximate_prior_beta_tables, fit_single_mvn, PriorApproximation};
pub use draws::{A0Record, Diagnostics, ParameterSummary, PosteriorDraws, SamplerConfig};
pub use phm::{phm_fixed_a0, phm_fixed_a0_tables, phm_random_a0, phm_random_a0_tables};
pub use slice::{slice_sample_1d, SliceParams};
