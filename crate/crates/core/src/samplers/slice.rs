use rand::Rng;

use crate::error::{Error, Result};

/// Tuning for the univariate stepping-out / shrinkage slice sampler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceParams {
    /// Initial bracket width.
    pub width: f64,
    /// Cap on the total number of stepping-out steps (split at random
    /// between the two ends).
    pub max_steps: u32,
}

impl Default for SliceParams {
    fn default() -> Self {
        Self {
            width: 1.0,
            max_steps: 10,
        }
    }
}

const MAX_SHRINKS: usize = 10_000;

/// One slice-sampling update of `x0` targeting `exp(log_density)`.
///
/// The target is left invariant. A NaN density inside the shrinkage loop is
/// an error; `-inf` is treated as outside the slice.
pub fn slice_sample_1d<R: Rng + ?Sized>(
    mut log_density: impl FnMut(f64) -> f64,
    x0: f64,
    params: SliceParams,
    rng: &mut R,
) -> Result<f64> {
    let f0 = log_density(x0);
    if !f0.is_finite() {
        return Err(Error::Sampler(format!(
            "log density is {f0} at the current point {x0}"
        )));
    }
    let w = params.width;
    // level: f0 + log U with U in (0, 1]
    let y = f0 + (1.0 - rng.random::<f64>()).ln();

    let mut lo = x0 - w * rng.random::<f64>();
    let mut hi = lo + w;
    let m = params.max_steps.max(1);
    let mut left = (m as f64 * rng.random::<f64>()).floor() as u32;
    let mut right = (m - 1).saturating_sub(left);
    while left > 0 && y < log_density(lo) {
        lo -= w;
        left -= 1;
    }
    while right > 0 && y < log_density(hi) {
        hi += w;
        right -= 1;
    }

    for _ in 0..MAX_SHRINKS {
        let x1 = lo + rng.random::<f64>() * (hi - lo);
        let f1 = log_density(x1);
        if f1.is_nan() {
            return Err(Error::Sampler(format!("log density returned NaN at {x1}")));
        }
        if y < f1 {
            return Ok(x1);
        }
        if x1 < x0 {
            lo = x1;
        } else {
            hi = x1;
        }
        if hi - lo <= f64::EPSILON * x0.abs().max(1.0) {
            break;
        }
    }
    // bracket collapsed onto x0, which is always inside the slice
    Ok(x0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    fn chain(
        mut logf: impl FnMut(f64) -> f64,
        x0: f64,
        n: usize,
        params: SliceParams,
        seed: u64,
    ) -> Vec<f64> {
        let mut rng = stream(seed, 0, Purpose::Analysis);
        let mut x = x0;
        (0..n)
            .map(|_| {
                x = slice_sample_1d(&mut logf, x, params, &mut rng).unwrap();
                x
            })
            .collect()
    }

    fn mean_var(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
    }

    #[test]
    fn standard_normal_moments() {
        let xs = chain(|x| -0.5 * x * x, 0.0, 50_000, SliceParams::default(), 11);
        let (m, v) = mean_var(&xs);
        assert!(m.abs() < 0.02, "mean {m}");
        assert!((v - 1.0).abs() < 0.05, "var {v}");
    }

    #[test]
    fn gamma_on_log_scale() {
        // Gamma(3, rate 2) for x = exp(eta): log density 3 eta - 2 exp(eta)
        let etas = chain(|e| 3.0 * e - 2.0 * e.exp(), 0.0, 50_000, SliceParams::default(), 5);
        let xs: Vec<f64> = etas.iter().map(|e| e.exp()).collect();
        let (m, _) = mean_var(&xs);
        // iid sd is sqrt(3)/2/sqrt(n); allow for autocorrelation
        let se = (0.75f64 / 50_000.0).sqrt() * 3.0;
        assert!((m - 1.5).abs() < 2.0 * se, "mean {m}");
    }

    #[test]
    fn huge_width_terminates() {
        let params = SliceParams {
            width: 1e12,
            max_steps: 10,
        };
        let xs = chain(|x| -0.5 * x * x, 0.0, 200, params, 3);
        assert!(xs.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn nan_is_reported() {
        let mut rng = stream(1, 0, Purpose::Analysis);
        let err = slice_sample_1d(|x| if x == 0.0 { 0.0 } else { f64::NAN }, 0.0, SliceParams::default(), &mut rng);
        assert!(matches!(err, Err(Error::Sampler(_))));
    }

    #[test]
    fn non_finite_start_is_reported() {
        let mut rng = stream(1, 0, Purpose::Analysis);
        assert!(slice_sample_1d(|_| f64::NEG_INFINITY, 0.0, SliceParams::default(), &mut rng).is_err());
    }
}
