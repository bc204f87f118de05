//! Brute-force references computed from raw subject data, independent of
//! the risk-table and kernel code under test.

use ppsurv::data::{build_risk_table, DatasetRole, IntervalPartition, SurvivalDataset};
use ppsurv::model::{log_npp_beta_kernel, BetaPrior, HazardPrior, CellValues, PriorSpec};
use statrs::function::gamma::ln_gamma;

/// 20 subjects, one stratum, treatment-only covariate.
pub fn synthetic_twenty() -> SurvivalDataset {
    let times: Vec<f64> = (0..20).map(|i| 0.15 + 0.37 * ((i * 7) % 20) as f64 / 4.0).collect();
    let events: Vec<bool> = (0..20).map(|i| i % 4 != 3).collect();
    let x: Vec<f64> = (0..20).map(|i| (i % 2) as f64).collect();
    SurvivalDataset::new(times, events, x, 1, vec![0; 20], DatasetRole::Historical).unwrap()
}

fn trapezoid(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (hi - lo) / (n - 1) as f64;
    let inner: f64 = (1..n - 1).map(|i| f(lo + h * i as f64)).sum();
    h * (inner + 0.5 * (f(lo) + f(hi)))
}

pub struct QuadratureCheck {
    /// `log` of the integral of the exponentiated kernel with the
    /// `lambda0` normalisation added back.
    pub kernel: f64,
    /// `log` of the joint integral over `(beta, lambda0)`.
    pub brute: f64,
}

/// Marginal likelihood of `a0`-discounted data at `P = 1`, computed two
/// ways. The brute-force side integrates every hazard numerically.
pub fn npp_quadrature(a0: f64) -> QuadratureCheck {
    let d = synthetic_twenty();
    let cuts = vec![1.6];
    let (c, dr, var) = (1.5, 0.8, 10.0);
    let prior = PriorSpec {
        beta: BetaPrior::Normal { mean: vec![0.0], variance: vec![var] },
        lambda0: HazardPrior::Gamma { shape: CellValues::Constant(c), rate: CellValues::Constant(dr) },
        ..PriorSpec::default()
    };
    let part = IntervalPartition::new(vec![cuts.clone()]).unwrap();
    let rt = [build_risk_table(&d, &part).unwrap()];
    let (lo, hi, n) = (-8.0, 8.0, 4001);

    // Kernel side.
    let mut events = [0.0f64; 2];
    for i in 0..d.len() {
        if d.events()[i] {
            events[(d.times()[i] > cuts[0]) as usize] += 1.0;
        }
    }
    let norm: f64 = events
        .iter()
        .map(|e| {
            let p = a0 * e + c;
            ln_gamma(p) + c * dr.ln() - ln_gamma(c)
        })
        .sum();
    let k = |b: f64| log_npp_beta_kernel(&[b], &[a0], &rt, &prior).unwrap();
    let shift = k(0.0);
    let kernel = trapezoid(lo, hi, n, |b| (k(b) - shift).exp()).ln() + shift + norm;

    // Joint side, subject by subject.
    let log_gamma_prior = |eta: f64| c * dr.ln() - ln_gamma(c) + c * eta - dr * eta.exp();
    let log_joint_beta = |b: f64| {
        let mut exposure = [0.0f64; 2];
        let mut linear = 0.0;
        for i in 0..d.len() {
            let y = d.times()[i];
            let x = d.covariate_row(i)[0];
            let phi = (x * b).exp();
            exposure[0] += phi * y.min(cuts[0]);
            exposure[1] += phi * (y - cuts[0]).max(0.0);
            if d.events()[i] {
                linear += x * b;
            }
        }
        let mut total = a0 * linear - 0.5 * ((2.0 * std::f64::consts::PI * var).ln() + b * b / var);
        for kk in 0..2 {
            let (e, s) = (a0 * events[kk], a0 * exposure[kk]);
            let f = |eta: f64| e * eta - s * eta.exp() + log_gamma_prior(eta);
            let mode = ((e + c) / (s + dr)).ln();
            let m = f(mode);
            total += trapezoid(mode - 40.0, mode + 6.0, 6001, |eta| (f(eta) - m).exp()).ln() + m;
        }
        total
    };
    let shift = log_joint_beta(0.0);
    let brute = trapezoid(lo, hi, n, |b| (log_joint_beta(b) - shift).exp()).ln() + shift;
    QuadratureCheck { kernel, brute }
}

/// Agreement to `digits` significant figures of the marginal likelihoods.
pub fn same_significant_figures(a: f64, b: f64, digits: i32) -> bool {
    let (x, y) = (a.exp(), b.exp());
    (x - y).abs() <= 0.5 * 10f64.powi(-digits) * x.abs().max(y.abs())
}
