use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetRole {
    Current,
    Historical,
}

/// Right-censored survival data with a covariate matrix whose first column
/// is the treatment indicator. Strata are dense zero-based indices; the
/// external labels live in a [`StratumMap`].
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalDataset {
    times: Vec<f64>,
    events: Vec<bool>,
    covariates: Vec<f64>,
    n_covariates: usize,
    strata: Vec<usize>,
    role: DatasetRole,
}

impl SurvivalDataset {
    /// `covariates` is row-major with `n_covariates` columns.
    pub fn new(
        times: Vec<f64>,
        events: Vec<bool>,
        covariates: Vec<f64>,
        n_covariates: usize,
        strata: Vec<usize>,
        role: DatasetRole,
    ) -> Result<Self> {
        let n = times.len();
        if n_covariates == 0 {
            return Err(Error::InvalidData(
                "at least one covariate column (the treatment indicator) is required".into(),
            ));
        }
        if events.len() != n || strata.len() != n || covariates.len() != n * n_covariates {
            return Err(Error::InvalidData(format!(
                "length mismatch: {} times, {} events, {} strata, {} covariate values for {} columns",
                n,
                events.len(),
                strata.len(),
                covariates.len(),
                n_covariates
            )));
        }
        if let Some(i) = times.iter().position(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::InvalidData(format!(
                "subject {i}: observation time {} is not a finite nonnegative number",
                times[i]
            )));
        }
        if let Some(i) = covariates.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidData(format!(
                "subject {}: non-finite covariate value",
                i / n_covariates
            )));
        }
        Ok(Self {
            times,
            events,
            covariates,
            n_covariates,
            strata,
            role,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn events(&self) -> &[bool] {
        &self.events
    }

    pub fn strata(&self) -> &[usize] {
        &self.strata
    }

    pub fn n_covariates(&self) -> usize {
        self.n_covariates
    }

    pub fn covariates(&self) -> &[f64] {
        &self.covariates
    }

    pub fn covariate_row(&self, i: usize) -> &[f64] {
        &self.covariates[i * self.n_covariates..(i + 1) * self.n_covariates]
    }

    pub fn role(&self) -> DatasetRole {
        self.role
    }

    pub fn with_role(mut self, role: DatasetRole) -> Self {
        self.role = role;
        self
    }

    pub fn n_events(&self) -> usize {
        self.events.iter().filter(|e| **e).count()
    }

    /// Largest stratum index plus one (0 for an empty dataset).
    pub fn n_strata(&self) -> usize {
        self.strata.iter().max().map_or(0, |m| m + 1)
    }

    /// Concatenate datasets that share a covariate layout.
    pub fn concat(parts: &[&SurvivalDataset], role: DatasetRole) -> Result<Self> {
        let p = parts
            .first()
            .map(|d| d.n_covariates)
            .ok_or_else(|| Error::InvalidData("nothing to concatenate".into()))?;
        let mut times = Vec::new();
        let mut events = Vec::new();
        let mut covariates = Vec::new();
        let mut strata = Vec::new();
        for d in parts {
            if d.n_covariates != p {
                return Err(Error::InvalidData(format!(
                    "covariate column counts differ ({} vs {})",
                    p, d.n_covariates
                )));
            }
            times.extend_from_slice(&d.times);
            events.extend_from_slice(&d.events);
            covariates.extend_from_slice(&d.covariates);
            strata.extend_from_slice(&d.strata);
        }
        SurvivalDataset::new(times, events, covariates, p, strata, role)
    }

    /// Copy with every value of covariate column `col` multiplied by `factor`.
    pub fn scale_covariate(&self, col: usize, factor: f64) -> Self {
        let mut out = self.clone();
        for row in out.covariates.chunks_mut(self.n_covariates) {
            row[col] *= factor;
        }
        out
    }
}

/// Checks that a set of datasets can be analysed together: identical column
/// counts and a stratum label set that covers 0..S. Returns `(P, S)`.
pub fn check_compatible(datasets: &[&SurvivalDataset]) -> Result<(usize, usize)> {
    let first = datasets
        .first()
        .ok_or_else(|| Error::InvalidData("no datasets supplied".into()))?;
    let p = first.n_covariates();
    let mut seen = Vec::new();
    for (j, d) in datasets.iter().enumerate() {
        if d.n_covariates() != p {
            return Err(Error::InvalidData(format!(
                "dataset {j} has {} covariate columns, expected {p}",
                d.n_covariates()
            )));
        }
        for &s in d.strata() {
            if s >= seen.len() {
                seen.resize(s + 1, false);
            }
            seen[s] = true;
        }
    }
    if let Some(gap) = seen.iter().position(|x| !x) {
        return Err(Error::InvalidData(format!(
            "stratum index {gap} has no subjects in any dataset; labels must be contiguous"
        )));
    }
    Ok((p, seen.len()))
}

/// Dense mapping between external stratum labels and zero-based indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StratumMap {
    labels: Vec<String>,
}

impl StratumMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_labels(labels: Vec<String>) -> Self {
        Self { labels }
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Index for `label`, registering it if unseen.
    pub fn intern(&mut self, label: &str) -> usize {
        match self.index_of(label) {
            Some(i) => i,
            None => {
                self.labels.push(label.to_string());
                self.labels.len() - 1
            }
        }
    }

    /// Register a batch of labels in natural order (numeric when every label
    /// parses as a number, lexicographic otherwise).
    pub fn intern_sorted<'a>(&mut self, labels: impl IntoIterator<Item = &'a str>) {
        let mut fresh: Vec<&str> = labels
            .into_iter()
            .filter(|l| self.index_of(l).is_none())
            .collect();
        fresh.sort_unstable();
        fresh.dedup();
        let numeric: Option<Vec<f64>> = fresh.iter().map(|l| l.parse::<f64>().ok()).collect();
        if let Some(keys) = numeric {
            let mut paired: Vec<(f64, &str)> = keys.into_iter().zip(fresh).collect();
            paired.sort_by(|a, b| a.0.total_cmp(&b.0));
            fresh = paired.into_iter().map(|(_, l)| l).collect();
        }
        for l in fresh {
            self.intern(l);
        }
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.labels.get(index).map(String::as_str)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn as_btree(&self) -> BTreeMap<String, usize> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect()
    }
}
