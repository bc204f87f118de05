mod common;

use common::stats::{batch_mc_se, ks_two_sample, thin};
use ppsurv::data::{build_risk_table, default_partition, DatasetRole, IntervalPartition, SurvivalDataset};
use ppsurv::matrix::DrawMatrix;
use ppsurv::model::{BetaHyper, HazardPrior, MvnComponent, MvnMixture, NppKernel, PriorSpec};
use ppsurv::rng::{stream, Purpose};
use ppsurv::samplers::{
    approximate_prior_beta, fit_single_mvn, phm_fixed_a0, phm_random_a0, slice_sample_1d, SamplerConfig, SliceParams,
};
use ppsurv::Error;
use rand_distr::{Distribution, Normal};

fn cfg(n_mc: usize, n_burnin: usize, seed: u64) -> SamplerConfig {
    SamplerConfig {
        n_mc,
        n_burnin,
        seed,
        ..SamplerConfig::default()
    }
}

fn melanoma_partition(cur: &SurvivalDataset, hist: &SurvivalDataset) -> IntervalPartition {
    default_partition(&[cur, hist], &[2, 2]).unwrap()
}

#[test]
fn conjugate_hazard_matches_gamma_posterior() {
    let p = common::checks::conjugate_ad_p_values(1..21);
    let passed = p.iter().filter(|p| **p > 0.01).count();
    assert!(passed >= 19, "{p:?}");
}

#[test]
fn zero_discounting_ignores_history() {
    let (cur, hist, _) = common::melanoma();
    let p = common::checks::a0_zero_ks(&cur, &hist, 11);
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn full_borrowing_with_shared_baseline_equals_pooling() {
    let (cur, hist, _) = common::melanoma();
    let p = common::checks::a0_one_shared_ks(&cur, &hist, 12);
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn vanishing_discount_recovers_initial_prior() {
    let (cur, hist, _) = common::melanoma();
    let part = melanoma_partition(&cur, &hist);
    let c = SamplerConfig { beta_width: 30.0, ..cfg(1, 5, 1) };
    let approx = approximate_prior_beta(
        std::slice::from_ref(&hist),
        &part,
        &PriorSpec::default(),
        &[BetaHyper::new(1.0, 1e9).unwrap()],
        6000,
        &c,
    )
    .unwrap();
    let b = approx.beta.column_vec(0);
    let (m, v) = common::mean_var(&b);
    let se = batch_mc_se(&b);
    assert!(m.abs() <= 2.0 * se, "mean {m}, mc se {se}");
    assert!((v / 1e3 - 1.0).abs() <= 0.05, "variance {v}");
}

#[test]
fn concentrated_discount_matches_fixed_kernel() {
    let (cur, hist, _) = common::melanoma();
    let part = melanoma_partition(&cur, &hist);
    let prior = PriorSpec::default();
    let approx = approximate_prior_beta(
        std::slice::from_ref(&hist),
        &part,
        &prior,
        &[BetaHyper::new(1e3, 1e3).unwrap()],
        3000,
        &cfg(1, 3, 4),
    )
    .unwrap();

    let tables = [build_risk_table(&hist, &part).unwrap()];
    let kernel = NppKernel::new(&tables, &[0.5], &prior).unwrap();
    let mut rng = stream(5, 0, Purpose::Analysis);
    let mut x = 0.0;
    let mut long = Vec::with_capacity(30_000);
    for _ in 0..30_000 {
        x = slice_sample_1d(|b| kernel.log_density(&[b]).unwrap(), x, SliceParams::default(), &mut rng).unwrap();
        long.push(x);
    }
    let a = approx.beta.column_vec(0);
    let (ma, va) = common::mean_var(&a);
    let (ml, vl) = common::mean_var(&long);
    let se = (batch_mc_se(&a).powi(2) + batch_mc_se(&long).powi(2)).sqrt();
    assert!((ma - ml).abs() <= 4.0 * se, "{ma} vs {ml}, se {se}");
    assert!((va.sqrt() / vl.sqrt() - 1.0).abs() <= 0.1, "sd {} vs {}", va.sqrt(), vl.sqrt());
    let a0 = approx.a0.column_vec(0);
    assert!(a0.iter().all(|a| (a - 0.5).abs() < 0.1));
}

#[test]
fn approximation_returns_requested_rows() {
    let (cur, hist, _) = common::melanoma();
    let part = melanoma_partition(&cur, &hist);
    let hypers = [BetaHyper::new(1.0, 1.0).unwrap()];
    let approx = approximate_prior_beta(std::slice::from_ref(&hist), &part, &PriorSpec::default(), &hypers, 2, &cfg(1, 1, 1)).unwrap();
    assert_eq!((approx.beta.rows(), approx.a0.rows()), (2, 2));
}

#[test]
fn single_normal_fit_recovers_moments() {
    let mut rng = stream(6, 0, Purpose::Analysis);
    let n = 100_000;
    let z = Normal::new(0.0, 1.0).unwrap();
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let (a, b): (f64, f64) = (z.sample(&mut rng), z.sample(&mut rng));
        rows.push(vec![3.0 + 2.0 * a, 0.6 * a + 0.8 * b]);
    }
    let fit = fit_single_mvn(&DrawMatrix::from_rows(&rows).unwrap()).unwrap();
    let c = &fit.components()[0];
    assert!((c.mean[0] - 3.0).abs() < 0.03 && c.mean[1].abs() < 0.02);
    assert!((c.covariance[0][0] - 4.0).abs() < 0.08);
    assert!((c.covariance[1][1] - 1.0).abs() < 0.02);
    assert!((c.covariance[0][1] - 1.2).abs() < 0.02);
    assert_eq!(c.covariance[0][1], c.covariance[1][0]);

    let flat = DrawMatrix::from_rows(&vec![vec![1.0, 2.0]; 10]).unwrap();
    assert!(matches!(fit_single_mvn(&flat), Err(Error::Fitting(_))));
}

#[test]
fn mixture_equal_to_initial_prior_matches_no_history_run() {
    let (cur, hist, _) = common::melanoma();
    let part = melanoma_partition(&cur, &hist);
    let prior = PriorSpec::default();
    let mix = MvnMixture::single(vec![0.0], vec![vec![1e3]]).unwrap();
    let random = phm_random_a0(&cur, &mix, &part, &prior, &cfg(10_000, 200, 21)).unwrap();
    let plain = phm_fixed_a0(Some(&cur), &[], &[], &part, &prior, &cfg(10_000, 200, 22)).unwrap();
    let p = ks_two_sample(&thin(&random.beta.column_vec(0), 10), &thin(&plain.beta.column_vec(0), 10));
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn twin_components_act_as_one() {
    let (cur, hist, _) = common::melanoma();
    let part = melanoma_partition(&cur, &hist);
    let comp = MvnComponent { mean: vec![-0.2], covariance: vec![vec![0.04]], weight: 0.5 };
    let twin = MvnMixture::new(vec![comp.clone(), comp.clone()]).unwrap();
    let single = MvnMixture::single(vec![-0.2], vec![vec![0.04]]).unwrap();
    for b in [-1.0, -0.2, 0.3] {
        assert!((twin.log_density(&[b]) - single.log_density(&[b])).abs() < 1e-12);
    }
    let c = cfg(5000, 100, 23);
    let a = phm_random_a0(&cur, &twin, &part, &PriorSpec::default(), &c).unwrap();
    let b = phm_random_a0(&cur, &single, &part, &PriorSpec::default(), &SamplerConfig { seed: 24, ..c }).unwrap();
    let p = ks_two_sample(&thin(&a.beta.column_vec(0), 5), &thin(&b.beta.column_vec(0), 5));
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn seeds_reproduce_and_differ() {
    let (cur, hist, _) = common::melanoma();
    let part = melanoma_partition(&cur, &hist);
    let prior = PriorSpec::default();
    let run = |seed| phm_fixed_a0(Some(&cur), std::slice::from_ref(&hist), &[0.5], &part, &prior, &cfg(300, 20, seed)).unwrap();
    assert_eq!(run(7), run(7));
    assert_ne!(run(7).beta, run(8).beta);
    let mix = MvnMixture::single(vec![0.0], vec![vec![1.0]]).unwrap();
    let r = |seed| phm_random_a0(&cur, &mix, &part, &prior, &cfg(300, 20, seed)).unwrap();
    assert_eq!(r(9), r(9));
}

#[test]
fn burn_in_does_not_shift_the_chain() {
    let (cur, hist, _) = common::melanoma();
    let part = melanoma_partition(&cur, &hist);
    let prior = PriorSpec::default();
    let run = |burn, seed| {
        phm_fixed_a0(Some(&cur), std::slice::from_ref(&hist), &[0.5], &part, &prior, &cfg(5000, burn, seed))
            .unwrap()
            .beta
            .column_vec(0)
    };
    let (cold, warm) = (run(0, 31), run(2000, 32));
    let (mc, mw) = (common::mean_var(&cold).0, common::mean_var(&warm).0);
    let se = (batch_mc_se(&cold).powi(2) + batch_mc_se(&warm).powi(2)).sqrt();
    assert!((mc - mw).abs() <= 4.0 * se, "{mc} vs {mw}, se {se}");
}

#[test]
fn improper_hazard_prior_with_empty_cell_is_reported() {
    let n = 20;
    let d = SurvivalDataset::new(
        (0..n).map(|i| 0.1 + i as f64 * 0.1).collect(),
        vec![true; n],
        (0..n).map(|i| (i % 2) as f64).collect(),
        1,
        vec![0; n],
        DatasetRole::Current,
    )
    .unwrap();
    let part = IntervalPartition::new(vec![vec![1.0, 50.0]]).unwrap();
    let prior = PriorSpec { lambda: HazardPrior::Improper, ..PriorSpec::default() };
    match phm_fixed_a0(Some(&d), &[], &[], &part, &prior, &cfg(10, 0, 1)) {
        Err(Error::DegenerateConditional { stratum, interval, .. }) => assert_eq!((stratum, interval), (1, 3)),
        other => panic!("expected a degenerate conditional, got {other:?}"),
    }
}
