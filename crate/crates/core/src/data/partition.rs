use serde::{Deserialize, Serialize};

use super::dataset::SurvivalDataset;
use crate::error::{Error, Result};

/// Per-stratum change points `0 = t_0 < t_1 < ... < t_K = inf`. Only the
/// interior points `t_1..t_{K-1}` are stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalPartition {
    cuts: Vec<Vec<f64>>,
}

impl IntervalPartition {
    pub fn new(cuts: Vec<Vec<f64>>) -> Result<Self> {
        if cuts.is_empty() {
            return Err(Error::Partition {
                stratum: 0,
                msg: "no strata".into(),
            });
        }
        for (s, c) in cuts.iter().enumerate() {
            let mut prev = 0.0;
            for &t in c {
                if !(t.is_finite() && t > prev) {
                    return Err(Error::Partition {
                        stratum: s + 1,
                        msg: format!("change points must be finite and strictly increasing from 0, got {c:?}"),
                    });
                }
                prev = t;
            }
        }
        Ok(Self { cuts })
    }

    /// One interval `(0, inf)` in each of `n_strata` strata.
    pub fn single(n_strata: usize) -> Self {
        Self {
            cuts: vec![Vec::new(); n_strata],
        }
    }

    pub fn n_strata(&self) -> usize {
        self.cuts.len()
    }

    pub fn n_intervals(&self, stratum: usize) -> usize {
        self.cuts[stratum].len() + 1
    }

    pub fn interval_counts(&self) -> Vec<usize> {
        (0..self.n_strata()).map(|s| self.n_intervals(s)).collect()
    }

    /// Interior change points of a stratum.
    pub fn cuts(&self, stratum: usize) -> &[f64] {
        &self.cuts[stratum]
    }

    pub fn all_cuts(&self) -> &[Vec<f64>] {
        &self.cuts
    }

    /// `(t_{k-1}, t_k)` with `t_K = inf`.
    pub fn bounds(&self, stratum: usize, k: usize) -> (f64, f64) {
        let c = &self.cuts[stratum];
        let lo = if k == 0 { 0.0 } else { c[k - 1] };
        let hi = c.get(k).copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }

    /// Index `k` with `t_{k-1} < y <= t_k`; `y = 0` maps to the first interval.
    pub fn interval_of(&self, stratum: usize, y: f64) -> usize {
        self.cuts[stratum].partition_point(|&t| t < y)
    }
}

/// Inclusive (type 7) empirical quantile of sorted data.
pub(crate) fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Change points at the `k/K_s` quantiles of the pooled event times of each
/// stratum, so every interval holds about the same number of events.
pub fn default_partition(
    datasets: &[&SurvivalDataset],
    n_intervals: &[usize],
) -> Result<IntervalPartition> {
    let mut event_times: Vec<Vec<f64>> = vec![Vec::new(); n_intervals.len()];
    for d in datasets {
        for i in 0..d.len() {
            if !d.events()[i] {
                continue;
            }
            let s = d.strata()[i];
            let slot = event_times.get_mut(s).ok_or_else(|| Error::Partition {
                stratum: s + 1,
                msg: format!("no interval count given (only {} strata configured)", n_intervals.len()),
            })?;
            slot.push(d.times()[i]);
        }
    }
    let cuts = event_times
        .into_iter()
        .zip(n_intervals)
        .enumerate()
        .map(|(s, (mut times, &k))| {
            times.sort_by(f64::total_cmp);
            stratum_cuts(s, &times, k)
        })
        .collect::<Result<Vec<_>>>()?;
    IntervalPartition::new(cuts)
}

fn stratum_cuts(stratum: usize, times: &[f64], k: usize) -> Result<Vec<f64>> {
    let err = |msg: String| Error::Partition {
        stratum: stratum + 1,
        msg,
    };
    if k == 0 {
        return Err(err("interval count must be at least 1".into()));
    }
    if k == 1 {
        return Ok(Vec::new());
    }
    if times.len() < k {
        return Err(err(format!(
            "{} events cannot fill {k} intervals; reduce the interval count",
            times.len()
        )));
    }
    let mut distinct = times.to_vec();
    distinct.dedup();
    let mut cuts: Vec<f64> = Vec::with_capacity(k - 1);
    for j in 1..k {
        let q = quantile_type7(times, j as f64 / k as f64);
        let prev = cuts.last().copied().unwrap_or(0.0);
        let c = if q > prev {
            q
        } else {
            // duplicate quantile from tied times: move to the midpoint
            // between the next two distinct event times after `prev`
            let a = distinct.partition_point(|&t| t <= prev);
            match (distinct.get(a), distinct.get(a + 1)) {
                (Some(&lo), Some(&hi)) => 0.5 * (lo + hi),
                _ => {
                    return Err(err(format!(
                        "tied event times leave fewer than {k} distinct intervals; reduce the interval count"
                    )))
                }
            }
        };
        cuts.push(c);
    }
    // the last interval must still contain an event
    if cuts.last().is_some_and(|&c| c >= *distinct.last().expect("nonempty")) {
        return Err(err(format!(
            "tied event times leave the last of {k} intervals without events; reduce the interval count"
        )));
    }
    Ok(cuts)
}
