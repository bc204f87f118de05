//! Distributional checks shared by the integration tests and the
//! acceptance report.

use ppsurv::data::{default_partition, DatasetRole, IntervalPartition, SurvivalDataset};
use ppsurv::model::{CellValues, HazardPrior, PriorSpec};
use ppsurv::rng::{stream, Purpose};
use ppsurv::samplers::{phm_fixed_a0, SamplerConfig};
use ppsurv::sim::{construct_observed_data, simulate_complete_data, CompleteSubject, CovariatePool, TrialDesignConfig};
use statrs::distribution::{ContinuousCDF, Gamma};

use super::stats::{anderson_darling, ks_one_sample, ks_two_sample, thin};

fn cfg(n_mc: usize, n_burnin: usize, seed: u64) -> SamplerConfig {
    SamplerConfig {
        n_mc,
        n_burnin,
        seed,
        ..SamplerConfig::default()
    }
}

/// Anderson-Darling p-values of `lambda` draws against the closed-form
/// Gamma posterior of the covariate-free exponential model, one per seed.
pub fn conjugate_ad_p_values(seeds: std::ops::Range<u64>) -> Vec<f64> {
    let n = 60;
    let times: Vec<f64> = (0..n).map(|i| -((i as f64 + 0.5) / n as f64).ln() / 1.7).collect();
    let events: Vec<bool> = (0..n).map(|i| i % 5 != 0).collect();
    let d = SurvivalDataset::new(times.clone(), events.clone(), vec![0.0; n], 1, vec![0; n], DatasetRole::Current).unwrap();
    let (a, b) = (2.0, 1.5);
    let prior = PriorSpec {
        lambda: HazardPrior::Gamma { shape: CellValues::Constant(a), rate: CellValues::Constant(b) },
        ..PriorSpec::default()
    };
    let shape = a + events.iter().filter(|e| **e).count() as f64;
    let rate = b + times.iter().sum::<f64>();
    let post = Gamma::new(shape, rate).unwrap();
    seeds
        .map(|seed| {
            let draws = phm_fixed_a0(Some(&d), &[], &[], &IntervalPartition::single(1), &prior, &cfg(1000, 10, seed)).unwrap();
            anderson_darling(&draws.lambda[0].column_vec(0), |x| post.cdf(x))
        })
        .collect()
}

/// Two-sample KS p-value of thinned `beta_1` draws: `a0 = 0` with history
/// against a run without history.
pub fn a0_zero_ks(cur: &SurvivalDataset, hist: &SurvivalDataset, seed: u64) -> f64 {
    let part = default_partition(&[cur, hist], &[2, 2]).unwrap();
    let prior = PriorSpec::default();
    let with = phm_fixed_a0(Some(cur), std::slice::from_ref(hist), &[0.0], &part, &prior, &cfg(10_000, 200, seed)).unwrap();
    let without = phm_fixed_a0(Some(cur), &[], &[], &part, &prior, &cfg(10_000, 200, seed + 1)).unwrap();
    ks_two_sample(&thin(&with.beta.column_vec(0), 10), &thin(&without.beta.column_vec(0), 10))
}

/// Two-sample KS p-value of thinned `beta_1` draws: `a0 = 1` with shared
/// baselines against a single pooled dataset.
pub fn a0_one_shared_ks(cur: &SurvivalDataset, hist: &SurvivalDataset, seed: u64) -> f64 {
    let part = default_partition(&[cur, hist], &[2, 2]).unwrap();
    let shared = PriorSpec { shared_baseline: true, ..PriorSpec::default() };
    let with = phm_fixed_a0(Some(cur), std::slice::from_ref(hist), &[1.0], &part, &shared, &cfg(10_000, 200, seed)).unwrap();
    let pooled = SurvivalDataset::concat(&[cur, hist], DatasetRole::Current).unwrap();
    let alone = phm_fixed_a0(Some(&pooled), &[], &[], &part, &PriorSpec::default(), &cfg(10_000, 200, seed + 1)).unwrap();
    ks_two_sample(&thin(&with.beta.column_vec(0), 10), &thin(&alone.beta.column_vec(0), 10))
}

/// KS p-values of simulated event times against the analytic survivor
/// `exp(-min(t, 1) - 3 max(0, t - 1))`, one per seed.
pub fn piecewise_survivor_p_values(seeds: std::ops::Range<u64>) -> Vec<f64> {
    let design = TrialDesignConfig::new(2000, 1, 1.0);
    let pool = CovariatePool::from_datasets(&[]).unwrap();
    let part = IntervalPartition::new(vec![vec![1.0]]).unwrap();
    seeds
        .map(|seed| {
            let mut rng = stream(seed, 0, Purpose::Generate);
            let subjects = simulate_complete_data(&design, &[0.0], &[vec![1.0, 3.0]], &pool, &part, &mut rng).unwrap();
            let t: Vec<f64> = subjects.iter().map(|s| s.event_time).collect();
            ks_one_sample(&t, |x| 1.0 - (-x.min(1.0) - 3.0 * (x - 1.0).max(0.0)).exp())
        })
        .collect()
}

fn subject(r: f64, t: f64, c: f64) -> CompleteSubject {
    let time = t.min(c);
    CompleteSubject {
        enrollment: r,
        covariates: vec![0.0],
        stratum: 0,
        event_time: t,
        censor_time: c,
        time,
        event: t <= c,
        elapsed: r + time,
    }
}

/// Six subjects with interleaved enrollment, one censored before the
/// cutoff, one still at risk and one enrolled after it.
pub fn hand_trace_subjects() -> Vec<CompleteSubject> {
    let inf = f64::INFINITY;
    vec![
        subject(0.0, 2.0, inf),
        subject(0.5, 0.8, inf),
        subject(1.0, 5.0, 0.6),
        subject(1.2, 0.4, inf),
        subject(1.5, 3.0, inf),
        subject(2.5, 0.1, inf),
    ]
}

/// Worked by hand: event calendar times are 2.0, 1.3, 1.6, 4.5 and 2.6, so
/// the third event falls at T = 2.0; subject 6 enrolls after T and is
/// dropped; subject 5 is censored at T - 1.5 = 0.5. With T_min = 3 the
/// cutoff moves to 3.0, subject 6 is kept with its event and subject 5 is
/// censored at 1.5.
pub fn hand_trace_matches() -> bool {
    let s = hand_trace_subjects();
    let obs = construct_observed_data(&s, 3, 0.0, None).unwrap();
    let first = obs.cutoff == 2.0
        && obs.data.times() == [2.0, 0.8, 0.6, 0.4, 0.5]
        && obs.data.events() == [true, true, false, true, false];
    let late = construct_observed_data(&s, 3, 3.0, None).unwrap();
    let second = late.cutoff == 3.0
        && late.data.times() == [2.0, 0.8, 0.6, 0.4, 1.5, 0.1]
        && late.data.events() == [true, true, false, true, false, true];
    first && second
}
