//! Building blocks shared by the Gibbs samplers.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use super::draws::Diagnostics;
use super::slice::{slice_sample_1d, SliceParams};
use crate::data::RiskTable;
use crate::error::{Error, Result};
use crate::model::{dot, exp_clamped, gamma_conditional, BetaPrior, HazardPrior, HazardSet, MvnMixture, PriorSpec};

/// One likelihood block of the `beta` conditional: a risk table, its power
/// weight and the hazard set it is evaluated with.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Block<'a> {
    pub table: &'a RiskTable,
    pub scale: f64,
    pub set: HazardSet,
}

/// `score'beta - sum_g w_g exp(x_g'beta)` with `w_g = scale * sum_k lambda_sk r_gk`,
/// stored over collapsed covariate groups of every block.
pub(crate) struct BetaTarget<'a> {
    p: usize,
    blocks: Vec<Block<'a>>,
    rows: Vec<f64>,
    weights: Vec<f64>,
    eta: Vec<f64>,
    score: Vec<f64>,
    active: Vec<Vec<usize>>,
}

impl<'a> BetaTarget<'a> {
    pub fn new(p: usize, blocks: Vec<Block<'a>>) -> Self {
        let mut rows = Vec::new();
        let mut score = vec![0.0; p];
        for b in &blocks {
            for g in b.table.groups() {
                rows.extend_from_slice(&g.x);
            }
            for (s, v) in score.iter_mut().zip(b.table.event_covariate_sum()) {
                *s += b.scale * v;
            }
        }
        let n = rows.len() / p;
        let active = (0..p)
            .map(|j| (0..n).filter(|&g| rows[g * p + j] != 0.0).collect())
            .collect();
        Self {
            p,
            blocks,
            rows,
            weights: vec![0.0; n],
            eta: vec![0.0; n],
            score,
            active,
        }
    }

    /// Recomputes group weights for the current hazards and the linear
    /// predictors for `beta`.
    pub fn refresh(&mut self, beta: &[f64], lambda: &[Vec<f64>], lambda0: Option<&[Vec<f64>]>) {
        let mut g = 0;
        for b in &self.blocks {
            let hazards = match (b.set, lambda0) {
                (HazardSet::Historical, Some(l0)) => l0,
                _ => lambda,
            };
            for grp in b.table.groups() {
                let lam = &hazards[grp.stratum];
                self.weights[g] = b.scale * dot(lam, &grp.exposure);
                g += 1;
            }
        }
        for (e, x) in self.eta.iter_mut().zip(self.rows.chunks_exact(self.p)) {
            *e = dot(x, beta);
        }
    }

    /// Log target along coordinate `j`, up to a constant, when `beta_j` moves
    /// from `current` to `b`.
    fn coordinate(&self, j: usize, current: f64, b: f64) -> f64 {
        let mut total = self.score[j] * b;
        let p = self.p;
        for &g in &self.active[j] {
            let x = self.rows[g * p + j];
            total -= self.weights[g] * exp_clamped(self.eta[g] + x * (b - current));
        }
        total
    }

    fn shift(&mut self, j: usize, delta: f64) {
        let p = self.p;
        for &g in &self.active[j] {
            self.eta[g] += self.rows[g * p + j] * delta;
        }
    }
}

#[derive(Clone, Copy)]
pub(crate) enum BetaPriorTerm<'a> {
    Independent(&'a BetaPrior),
    Mixture(&'a MvnMixture),
}

/// One systematic scan of coordinate-wise slice updates of `beta`.
pub(crate) fn update_beta<R: Rng + ?Sized>(
    beta: &mut [f64],
    target: &mut BetaTarget<'_>,
    prior: BetaPriorTerm<'_>,
    params: SliceParams,
    rng: &mut R,
) -> Result<()> {
    let mut scratch = beta.to_vec();
    for j in 0..beta.len() {
        let old = beta[j];
        let new = {
            let target = &*target;
            let scratch = &mut scratch;
            let logf = |b: f64| {
                let prior_term = match prior {
                    BetaPriorTerm::Independent(bp) => bp.log_density_coord(j, b),
                    BetaPriorTerm::Mixture(m) => {
                        scratch[j] = b;
                        m.log_density(scratch)
                    }
                };
                target.coordinate(j, old, b) + prior_term
            };
            slice_sample_1d(logf, old, params, rng)
                .map_err(|e| Error::Sampler(format!("beta_{}: {e}", j + 1)))?
        };
        beta[j] = new;
        scratch[j] = new;
        target.shift(j, new - old);
    }
    Ok(())
}

/// Draws every cell of one hazard set from its full conditional.
#[allow(clippy::too_many_arguments)]
pub(crate) fn update_hazards<R: Rng + ?Sized>(
    set: HazardSet,
    hazards: &mut [Vec<f64>],
    events: &[Vec<f64>],
    exposure: &[Vec<f64>],
    prior: &PriorSpec,
    params: SliceParams,
    diagnostics: &mut Diagnostics,
    rng: &mut R,
) -> Result<()> {
    let hazard_prior = match set {
        HazardSet::Current => &prior.lambda,
        HazardSet::Historical => &prior.lambda0,
    };
    let name = match set {
        HazardSet::Current => "lambda",
        HazardSet::Historical => "lambda0",
    };
    for (s, row) in hazards.iter_mut().enumerate() {
        for (k, value) in row.iter_mut().enumerate() {
            let (e, r) = (events[s][k], exposure[s][k]);
            *value = match hazard_prior {
                HazardPrior::LogNormal { .. } => {
                    let logf = |eta: f64| e * eta - eta.exp() * r + hazard_prior.log_density_log_scale(s, k, eta);
                    let eta = slice_sample_1d(logf, value.ln(), params, rng)
                        .map_err(|err| Error::Sampler(format!("{name}_{}_{}: {err}", s + 1, k + 1)))?;
                    floor_hazard(eta.exp(), diagnostics)
                }
                _ => {
                    let g = gamma_conditional(set, s, k, e, r, prior)?;
                    let dist = Gamma::new(g.shape, 1.0 / g.rate).map_err(|err| {
                        Error::Sampler(format!("{name}_{}_{}: {err}", s + 1, k + 1))
                    })?;
                    floor_hazard(dist.sample(rng), diagnostics)
                }
            };
        }
    }
    Ok(())
}

fn floor_hazard(v: f64, diagnostics: &mut Diagnostics) -> f64 {
    if v > 0.0 {
        v
    } else {
        diagnostics.floored_hazards += 1;
        f64::MIN_POSITIVE
    }
}

/// Per-stratum crude rates `events / exposure` of the pooled tables,
/// falling back to 1 where undefined.
pub(crate) fn initial_hazards(tables: &[&RiskTable], intervals: &[usize]) -> Vec<Vec<f64>> {
    intervals
        .iter()
        .enumerate()
        .map(|(s, &k)| {
            let events: f64 = tables.iter().map(|t| t.stratum_events(s)).sum();
            let exposure: f64 = tables.iter().map(|t| t.stratum_exposure(s)).sum();
            let rate = events / exposure;
            vec![if rate > 0.0 && rate.is_finite() { rate } else { 1.0 }; k]
        })
        .collect()
}

/// Checks that all tables agree on covariates and partition; returns them.
pub(crate) fn common_shape(tables: &[&RiskTable]) -> Result<(usize, Vec<usize>)> {
    let first = tables
        .first()
        .ok_or_else(|| Error::InvalidData("no data supplied to the sampler".into()))?;
    let p = first.n_covariates();
    let intervals = first.interval_counts().to_vec();
    if tables
        .iter()
        .any(|t| t.n_covariates() != p || t.interval_counts() != intervals.as_slice())
    {
        return Err(Error::InvalidData(
            "datasets disagree on the number of covariates or on the partition".into(),
        ));
    }
    Ok((p, intervals))
}
