use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::config::{Censoring, Enrollment, TrialDesignConfig};
use crate::data::{DatasetRole, IntervalPartition, SurvivalDataset};
use crate::error::{Error, Result};
use crate::model::{dot, exp_clamped};

/// Rows `(x_2..x_P, stratum)` pooled over the historical datasets, resampled
/// jointly when generating subjects.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariatePool {
    extra: Vec<f64>,
    strata: Vec<usize>,
    n_extra: usize,
}

impl CovariatePool {
    pub fn from_datasets(historical: &[SurvivalDataset]) -> Result<Self> {
        let n_extra = historical
            .first()
            .map(|d| d.n_covariates() - 1)
            .unwrap_or(0);
        let mut pool = Self {
            extra: Vec::new(),
            strata: Vec::new(),
            n_extra,
        };
        for d in historical {
            if d.n_covariates() - 1 != n_extra {
                return Err(Error::InvalidData(
                    "historical datasets disagree on the number of covariates".into(),
                ));
            }
            for i in 0..d.len() {
                pool.extra.extend_from_slice(&d.covariate_row(i)[1..]);
                pool.strata.push(d.strata()[i]);
            }
        }
        Ok(pool)
    }

    pub fn len(&self) -> usize {
        self.strata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    pub fn n_covariates(&self) -> usize {
        self.n_extra + 1
    }

    pub fn strata(&self) -> &[usize] {
        &self.strata
    }
}

/// One subject of the complete (uncensored by the analysis cutoff) trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompleteSubject {
    pub enrollment: f64,
    /// Full covariate row; the first entry is the treatment indicator.
    pub covariates: Vec<f64>,
    pub stratum: usize,
    pub event_time: f64,
    pub censor_time: f64,
    /// `min(event_time, censor_time)`.
    pub time: f64,
    /// `event_time <= censor_time`.
    pub event: bool,
    /// `enrollment + time`.
    pub elapsed: f64,
}

/// Draws an event time from the piecewise-exponential distribution with
/// hazards `rates` on the partition given by interior `cuts`.
pub fn sample_piecewise_exponential<R: Rng + ?Sized>(rates: &[f64], cuts: &[f64], rng: &mut R) -> f64 {
    let mut lo = 0.0;
    for (k, &rate) in rates.iter().enumerate() {
        let t = lo + rng.sample::<f64, _>(Exp1) / rate;
        match cuts.get(k) {
            Some(&hi) if t > hi => lo = hi,
            _ => return t,
        }
    }
    unreachable!("the last interval is unbounded")
}

/// Complete data for `design.n_subjects` subjects under `(beta, lambda)`.
/// `lambda[s]` must match the generation partition of stratum `s`.
pub fn simulate_complete_data<R: Rng + ?Sized>(
    design: &TrialDesignConfig,
    beta: &[f64],
    lambda: &[Vec<f64>],
    pool: &CovariatePool,
    partition: &IntervalPartition,
    rng: &mut R,
) -> Result<Vec<CompleteSubject>> {
    let p = beta.len();
    if p != pool.n_covariates() {
        return Err(Error::config(
            "sampling_prior.beta",
            format!("beta has {p} entries but the covariate pool has {} columns", pool.n_covariates()),
        ));
    }
    if lambda.len() != partition.n_strata()
        || lambda.iter().enumerate().any(|(s, l)| l.len() != partition.n_intervals(s))
    {
        return Err(Error::config(
            "sampling_prior.lambda",
            "hazard vectors do not match the generation partition",
        ));
    }
    if let Some(v) = lambda.iter().flatten().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Domain(format!("generating hazard {v} is not positive")));
    }
    if pool.is_empty() && (p > 1 || partition.n_strata() > 1) {
        return Err(Error::config(
            "data.historical",
            "covariate pool is empty but covariates or strata must be resampled",
        ));
    }
    if let Some(&s) = pool.strata().iter().find(|&&s| s >= lambda.len()) {
        return Err(Error::config(
            "sampling_prior.lambda",
            format!("pool contains stratum {} without generating hazards", s + 1),
        ));
    }

    let mut out = Vec::with_capacity(design.n_subjects);
    let mut x = vec![0.0; p];
    let mut rates = Vec::new();
    for _ in 0..design.n_subjects {
        let enrollment = match design.enrollment {
            Enrollment::Uniform { period } => rng.random::<f64>() * period,
            Enrollment::Exponential { rate } => rng.sample::<f64, _>(Exp1) / rate,
        };
        x[0] = if rng.random::<f64>() < design.randomization { design.treatment_value } else { 0.0 };
        let stratum = if pool.is_empty() {
            0
        } else {
            let row = rng.random_range(0..pool.len());
            x[1..].copy_from_slice(&pool.extra[row * pool.n_extra..(row + 1) * pool.n_extra]);
            pool.strata[row]
        };
        let phi = exp_clamped(dot(&x, beta));
        rates.clear();
        rates.extend(lambda[stratum].iter().map(|l| l * phi));
        let event_time = sample_piecewise_exponential(&rates, partition.cuts(stratum), rng);

        let mut censor_time = match design.censoring {
            Censoring::None => f64::INFINITY,
            Censoring::Uniform { upper } => rng.random::<f64>() * upper,
            Censoring::Exponential { rate } => rng.sample::<f64, _>(Exp1) / rate,
            Censoring::Constant { time } => time,
        };
        if let Some(d) = design.dropout {
            if rng.random::<f64>() < d.probability {
                censor_time = censor_time.min(rng.random::<f64>() * d.bound);
            }
        }
        let time = event_time.min(censor_time);
        out.push(CompleteSubject {
            enrollment,
            covariates: x.clone(),
            stratum,
            event_time,
            censor_time,
            time,
            event: event_time <= censor_time,
            elapsed: enrollment + time,
        });
    }
    Ok(out)
}

/// The observed trial and its analysis cutoff in calendar time.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedTrial {
    pub data: SurvivalDataset,
    pub cutoff: f64,
}

/// Cuts the complete data at the calendar time of the `target_events`-th
/// event, bounded below by `t_min` and above by `t_max`.
///
/// If fewer than `target_events` events occur the cutoff is `t_max`
/// (unbounded when absent). Subjects enrolled at or after the cutoff are
/// dropped; those still at risk at the cutoff are censored there.
pub fn construct_observed_data(
    complete: &[CompleteSubject],
    target_events: usize,
    t_min: f64,
    t_max: Option<f64>,
) -> Result<ObservedTrial> {
    let p = complete
        .first()
        .map(|c| c.covariates.len())
        .ok_or_else(|| Error::InvalidData("no subjects to observe".into()))?;
    if target_events == 0 {
        return Err(Error::config("design.target_events", "must be at least 1"));
    }
    let mut event_times: Vec<f64> = complete.iter().filter(|c| c.event).map(|c| c.elapsed).collect();
    let upper = t_max.unwrap_or(f64::INFINITY);
    let mut cutoff = if event_times.len() >= target_events {
        let (_, nth, _) = event_times.select_nth_unstable_by(target_events - 1, f64::total_cmp);
        *nth
    } else {
        upper
    };
    cutoff = cutoff.max(t_min).min(upper);

    let mut times = Vec::new();
    let mut events = Vec::new();
    let mut covariates = Vec::new();
    let mut strata = Vec::new();
    for c in complete.iter().filter(|c| c.enrollment < cutoff) {
        let (y, nu) = if c.elapsed > cutoff {
            (cutoff - c.enrollment, false)
        } else {
            (c.time, c.event)
        };
        times.push(y);
        events.push(nu);
        covariates.extend_from_slice(&c.covariates);
        strata.push(c.stratum);
    }
    let data = SurvivalDataset::new(times, events, covariates, p, strata, DatasetRole::Current)?;
    Ok(ObservedTrial { data, cutoff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

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

    #[test]
    fn exponential_mean() {
        let design = TrialDesignConfig::new(50_000, 1, 1.0);
        let pool = CovariatePool::from_datasets(&[]).unwrap();
        let mut rng = stream(3, 0, Purpose::Generate);
        let subjects =
            simulate_complete_data(&design, &[0.0], &[vec![2.0]], &pool, &IntervalPartition::single(1), &mut rng)
                .unwrap();
        let mean = subjects.iter().map(|s| s.event_time).sum::<f64>() / 50_000.0;
        assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
    }

    #[test]
    fn constant_zero_censoring() {
        let mut design = TrialDesignConfig::new(100, 1, 1.0);
        design.censoring = Censoring::Constant { time: 0.0 };
        let pool = CovariatePool::from_datasets(&[]).unwrap();
        let mut rng = stream(3, 0, Purpose::Generate);
        let subjects =
            simulate_complete_data(&design, &[0.0], &[vec![1.0]], &pool, &IntervalPartition::single(1), &mut rng)
                .unwrap();
        assert!(subjects.iter().all(|s| !s.event && s.time == 0.0));
    }

    #[test]
    fn full_follow_up_keeps_everyone() {
        let subjects: Vec<_> = (0..5).map(|i| subject(0.0, 1.0 + i as f64, f64::INFINITY)).collect();
        let obs = construct_observed_data(&subjects, 5, 0.0, None).unwrap();
        assert_eq!(obs.data.n_events(), 5);
        assert_eq!(obs.data.times(), &[1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn first_event_cutoff() {
        let subjects = vec![
            subject(0.0, 3.0, f64::INFINITY),
            subject(1.0, 0.5, f64::INFINITY),
            subject(2.0, 0.1, f64::INFINITY),
        ];
        let obs = construct_observed_data(&subjects, 1, 0.0, None).unwrap();
        assert_eq!(obs.cutoff, 1.5);
        assert_eq!(obs.data.len(), 2);
        assert_eq!(obs.data.events(), &[false, true]);
        assert_eq!(obs.data.times(), &[1.5, 0.5]);
    }

    #[test]
    fn too_few_events_uses_t_max() {
        let subjects = vec![subject(0.0, 3.0, 1.0), subject(0.5, 2.0, f64::INFINITY)];
        let obs = construct_observed_data(&subjects, 2, 0.0, Some(2.0)).unwrap();
        assert_eq!(obs.cutoff, 2.0);
        assert_eq!(obs.data.times(), &[1.0, 1.5]);
        assert_eq!(obs.data.n_events(), 0);
    }

    #[test]
    fn t_min_extends_cutoff() {
        let subjects = vec![subject(0.0, 0.2, f64::INFINITY), subject(0.0, 5.0, f64::INFINITY)];
        let obs = construct_observed_data(&subjects, 1, 1.0, None).unwrap();
        assert_eq!(obs.cutoff, 1.0);
        assert_eq!(obs.data.times(), &[0.2, 1.0]);
    }
}
