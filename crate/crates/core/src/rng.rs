//! Counter-based RNG streams. Every stream is a pure function of the master
//! seed and a (trial, purpose) key, so results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    /// Standalone analyses.
    Analysis = 0,
    /// Drawing theta and simulating a trial.
    Generate = 1,
    /// Posterior fitting of a simulated trial.
    Fit = 2,
    /// Discounting-prior approximation.
    Approximate = 3,
    /// Elicitation of default sampling priors.
    Elicit = 4,
}

const PURPOSE_BITS: u32 = 4;

pub fn stream(seed: u64, index: u64, purpose: Purpose) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((index << PURPOSE_BITS) | purpose as u64);
    rng
}
