use rand::Rng;

use super::draws::{hazard_matrices, store_hazards, A0Record, Diagnostics, PosteriorDraws, SamplerConfig};
use super::gibbs::{
    common_shape, initial_hazards, update_beta, update_hazards, BetaPriorTerm, BetaTarget, Block,
};
use crate::data::{build_risk_table, IntervalPartition, RiskTable, SurvivalDataset};
use crate::error::{Error, Result};
use crate::matrix::DrawMatrix;
use crate::model::{data_terms, take_clamp_events, validate_a0, HazardSet, MvnMixture, PriorSpec};
use crate::rng::{stream, Purpose};

/// Posterior of the stratified PWCH proportional hazards model under a
/// power prior with fixed `a0`.
///
/// Without current data the returned `lambda` draws are those of the
/// historical (shared) hazards, i.e. the power-prior posterior itself.
pub fn phm_fixed_a0(
    current: Option<&SurvivalDataset>,
    historical: &[SurvivalDataset],
    a0: &[f64],
    partition: &IntervalPartition,
    prior: &PriorSpec,
    cfg: &SamplerConfig,
) -> Result<PosteriorDraws> {
    let current = current.map(|d| build_risk_table(d, partition)).transpose()?;
    let historical = historical
        .iter()
        .map(|d| build_risk_table(d, partition))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = stream(cfg.seed, 0, Purpose::Analysis);
    phm_fixed_a0_tables(current.as_ref(), &historical, a0, prior, cfg, &mut rng)
}

/// [`phm_fixed_a0`] on prebuilt risk tables with a caller-supplied stream.
pub fn phm_fixed_a0_tables<R: Rng + ?Sized>(
    current: Option<&RiskTable>,
    historical: &[RiskTable],
    a0: &[f64],
    prior: &PriorSpec,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<PosteriorDraws> {
    cfg.validate()?;
    validate_a0(a0, historical.len())?;
    let all: Vec<&RiskTable> = current.into_iter().chain(historical).collect();
    let (p, intervals) = common_shape(&all)?;
    prior.validate(p, &intervals)?;

    let shared = prior.shared_baseline;
    let has_lambda0 = !shared && current.is_some() && !historical.is_empty();
    let history_set = if has_lambda0 {
        HazardSet::Historical
    } else {
        HazardSet::Current
    };
    let mut blocks: Vec<Block> = current
        .map(|t| Block {
            table: t,
            scale: 1.0,
            set: HazardSet::Current,
        })
        .into_iter()
        .collect();
    blocks.extend(historical.iter().zip(a0).filter(|(_, &a)| a > 0.0).map(|(t, &a)| Block {
        table: t,
        scale: a,
        set: history_set,
    }));
    let mut target = BetaTarget::new(p, blocks);

    let hist_refs: Vec<&RiskTable> = historical.iter().collect();
    let mut beta = vec![0.0; p];
    let mut lambda = match current {
        Some(t) => initial_hazards(&[t], &intervals),
        None => initial_hazards(&hist_refs, &intervals),
    };
    let mut lambda0 = has_lambda0.then(|| initial_hazards(&hist_refs, &intervals));

    let n = cfg.n_mc;
    let mut beta_draws = DrawMatrix::zeros(n, p);
    let mut lambda_draws = hazard_matrices(n, &intervals);
    let mut lambda0_draws = has_lambda0.then(|| hazard_matrices(n, &intervals));
    let mut diagnostics = Diagnostics::default();
    take_clamp_events();

    for it in 0..cfg.n_burnin + n {
        target.refresh(&beta, &lambda, lambda0.as_deref());
        update_beta(&mut beta, &mut target, BetaPriorTerm::Independent(&prior.beta), cfg.beta_slice(), rng)?;

        let (events, exposure) =
            data_terms(HazardSet::Current, &beta, current, historical, a0, shared, &intervals);
        update_hazards(HazardSet::Current, &mut lambda, &events, &exposure, prior, cfg.hazard_slice(), &mut diagnostics, rng)?;
        if let Some(l0) = lambda0.as_mut() {
            let (events, exposure) =
                data_terms(HazardSet::Historical, &beta, current, historical, a0, shared, &intervals);
            update_hazards(HazardSet::Historical, l0, &events, &exposure, prior, cfg.hazard_slice(), &mut diagnostics, rng)?;
        }

        if let Some(row) = it.checked_sub(cfg.n_burnin) {
            beta_draws.row_mut(row).copy_from_slice(&beta);
            store_hazards(&mut lambda_draws, row, &lambda);
            if let (Some(d), Some(l0)) = (lambda0_draws.as_mut(), lambda0.as_ref()) {
                store_hazards(d, row, l0);
            }
        }
    }
    diagnostics.clamped_predictors = take_clamp_events();
    Ok(PosteriorDraws {
        beta: beta_draws,
        lambda: lambda_draws,
        lambda0: lambda0_draws,
        a0: A0Record::Fixed(a0.to_vec()),
        diagnostics,
    })
}

/// Posterior under a random `a0`: the current-data likelihood times a
/// multivariate-normal mixture approximating the discounting prior of `beta`.
/// The `lambda` prior is the one in `prior.lambda`.
pub fn phm_random_a0(
    current: &SurvivalDataset,
    mixture: &MvnMixture,
    partition: &IntervalPartition,
    prior: &PriorSpec,
    cfg: &SamplerConfig,
) -> Result<PosteriorDraws> {
    let table = build_risk_table(current, partition)?;
    let mut rng = stream(cfg.seed, 0, Purpose::Analysis);
    phm_random_a0_tables(&table, mixture, prior, cfg, &mut rng)
}

/// [`phm_random_a0`] on a prebuilt risk table with a caller-supplied stream.
pub fn phm_random_a0_tables<R: Rng + ?Sized>(
    current: &RiskTable,
    mixture: &MvnMixture,
    prior: &PriorSpec,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<PosteriorDraws> {
    cfg.validate()?;
    let p = current.n_covariates();
    if mixture.dim() != p {
        return Err(Error::Fitting(format!(
            "mixture prior has dimension {}, the data have {p} covariates",
            mixture.dim()
        )));
    }
    let intervals = current.interval_counts().to_vec();
    prior.lambda.validate("prior.lambda", &intervals)?;

    let mut target = BetaTarget::new(
        p,
        vec![Block {
            table: current,
            scale: 1.0,
            set: HazardSet::Current,
        }],
    );
    let mut beta = vec![0.0; p];
    let mut lambda = initial_hazards(&[current], &intervals);

    let n = cfg.n_mc;
    let mut beta_draws = DrawMatrix::zeros(n, p);
    let mut lambda_draws = hazard_matrices(n, &intervals);
    let mut diagnostics = Diagnostics::default();
    take_clamp_events();

    for it in 0..cfg.n_burnin + n {
        target.refresh(&beta, &lambda, None);
        update_beta(&mut beta, &mut target, BetaPriorTerm::Mixture(mixture), cfg.beta_slice(), rng)?;
        let (events, exposure) =
            data_terms(HazardSet::Current, &beta, Some(current), &[], &[], false, &intervals);
        update_hazards(HazardSet::Current, &mut lambda, &events, &exposure, prior, cfg.hazard_slice(), &mut diagnostics, rng)?;
        if let Some(row) = it.checked_sub(cfg.n_burnin) {
            beta_draws.row_mut(row).copy_from_slice(&beta);
            store_hazards(&mut lambda_draws, row, &lambda);
        }
    }
    diagnostics.clamped_predictors = take_clamp_events();
    Ok(PosteriorDraws {
        beta: beta_draws,
        lambda: lambda_draws,
        lambda0: None,
        a0: A0Record::Marginalized,
        diagnostics,
    })
}
