use std::collections::HashMap;

use super::dataset::SurvivalDataset;
use super::partition::IntervalPartition;
use crate::error::{Error, Result};

/// Exposure and event placement of one subject over its stratum's intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRisk {
    pub stratum: usize,
    /// `r_ik` for every interval of the stratum.
    pub exposure: Vec<f64>,
    /// Interval holding the event, if the subject had one.
    pub event_interval: Option<usize>,
}

/// Subjects sharing a stratum and covariate row. Likelihood terms only
/// depend on the data through these sums, so evaluations cost O(groups)
/// instead of O(subjects).
#[derive(Debug, Clone, PartialEq)]
pub struct RiskGroup {
    pub stratum: usize,
    pub x: Vec<f64>,
    /// Summed exposure per interval.
    pub exposure: Vec<f64>,
}

/// Sufficient statistics of one dataset under a fixed partition.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskTable {
    n_covariates: usize,
    intervals: Vec<usize>,
    subjects: Vec<SubjectRisk>,
    stratum_members: Vec<Vec<usize>>,
    groups: Vec<RiskGroup>,
    /// `sum_{i in G_s} nu_ik`
    event_counts: Vec<Vec<f64>>,
    /// `sum_i nu_i x_i`
    event_covariate_sum: Vec<f64>,
}

pub fn build_risk_table(data: &SurvivalDataset, partition: &IntervalPartition) -> Result<RiskTable> {
    let n_strata = partition.n_strata();
    let p = data.n_covariates();
    let intervals = partition.interval_counts();
    let mut subjects = Vec::with_capacity(data.len());
    let mut stratum_members = vec![Vec::new(); n_strata];
    let mut event_counts: Vec<Vec<f64>> = intervals.iter().map(|&k| vec![0.0; k]).collect();
    let mut event_covariate_sum = vec![0.0; p];
    let mut groups: Vec<RiskGroup> = Vec::new();
    let mut group_index: HashMap<(usize, Vec<u64>), usize> = HashMap::new();

    for i in 0..data.len() {
        let s = data.strata()[i];
        if s >= n_strata {
            return Err(Error::Partition {
                stratum: s + 1,
                msg: format!("subject {i} belongs to a stratum without a partition"),
            });
        }
        let y = data.times()[i];
        let k_count = intervals[s];
        let exposure: Vec<f64> = (0..k_count)
            .map(|k| {
                let (lo, hi) = partition.bounds(s, k);
                (y.min(hi) - lo).max(0.0)
            })
            .collect();
        let x = data.covariate_row(i);
        let event_interval = data.events()[i].then(|| partition.interval_of(s, y));
        if let Some(k) = event_interval {
            event_counts[s][k] += 1.0;
            for (acc, xv) in event_covariate_sum.iter_mut().zip(x) {
                *acc += xv;
            }
        }
        let key = (s, x.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        let g = *group_index.entry(key).or_insert_with(|| {
            groups.push(RiskGroup {
                stratum: s,
                x: x.to_vec(),
                exposure: vec![0.0; k_count],
            });
            groups.len() - 1
        });
        for (acc, r) in groups[g].exposure.iter_mut().zip(&exposure) {
            *acc += r;
        }
        stratum_members[s].push(i);
        subjects.push(SubjectRisk {
            stratum: s,
            exposure,
            event_interval,
        });
    }
    Ok(RiskTable {
        n_covariates: p,
        intervals,
        subjects,
        stratum_members,
        groups,
        event_counts,
        event_covariate_sum,
    })
}

impl RiskTable {
    pub fn n_covariates(&self) -> usize {
        self.n_covariates
    }

    pub fn n_strata(&self) -> usize {
        self.intervals.len()
    }

    pub fn interval_counts(&self) -> &[usize] {
        &self.intervals
    }

    pub fn subjects(&self) -> &[SubjectRisk] {
        &self.subjects
    }

    /// Index set `G_s`.
    pub fn stratum_members(&self, stratum: usize) -> &[usize] {
        &self.stratum_members[stratum]
    }

    pub fn groups(&self) -> &[RiskGroup] {
        &self.groups
    }

    pub fn event_counts(&self) -> &[Vec<f64>] {
        &self.event_counts
    }

    pub fn event_covariate_sum(&self) -> &[f64] {
        &self.event_covariate_sum
    }

    pub fn n_events(&self) -> f64 {
        self.event_counts.iter().flatten().sum()
    }

    /// Total exposure per stratum, ignoring covariates.
    pub fn stratum_exposure(&self, stratum: usize) -> f64 {
        self.groups
            .iter()
            .filter(|g| g.stratum == stratum)
            .flat_map(|g| g.exposure.iter())
            .sum()
    }

    pub fn stratum_events(&self, stratum: usize) -> f64 {
        self.event_counts[stratum].iter().sum()
    }
}
