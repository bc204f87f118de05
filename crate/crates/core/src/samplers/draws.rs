use std::io::Write;

use serde::{Deserialize, Serialize};

use super::slice::SliceParams;
use crate::error::{Error, Result};
use crate::matrix::DrawMatrix;

/// MCMC settings shared by every sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    /// Retained iterations.
    pub n_mc: usize,
    /// Discarded iterations before retention starts.
    pub n_burnin: usize,
    pub beta_width: f64,
    pub log_hazard_width: f64,
    pub max_steps: u32,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_mc: 10_000,
            n_burnin: 200,
            beta_width: 1.0,
            log_hazard_width: 1.0,
            max_steps: 10,
            seed: 1,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_mc == 0 {
            return Err(Error::config("sampler.n_mc", "must be at least 1"));
        }
        for (name, w) in [("sampler.beta_width", self.beta_width), ("sampler.log_hazard_width", self.log_hazard_width)] {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::config(name, format!("must be positive, got {w}")));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::config("sampler.max_steps", "must be at least 1"));
        }
        Ok(())
    }

    pub(crate) fn beta_slice(&self) -> SliceParams {
        SliceParams {
            width: self.beta_width,
            max_steps: self.max_steps,
        }
    }

    pub(crate) fn hazard_slice(&self) -> SliceParams {
        SliceParams {
            width: self.log_hazard_width,
            max_steps: self.max_steps,
        }
    }
}

/// How the discounting parameter entered a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum A0Record {
    Fixed(Vec<f64>),
    /// Random `a_0`, integrated out through the mixture prior on `beta`.
    Marginalized,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Linear predictors clamped to the safe exponent range.
    pub clamped_predictors: u64,
    /// Gamma draws that underflowed to zero and were floored.
    pub floored_hazards: u64,
}

/// Retained posterior draws. Hazard matrices are per stratum with one column
/// per interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDraws {
    pub beta: DrawMatrix,
    pub lambda: Vec<DrawMatrix>,
    pub lambda0: Option<Vec<DrawMatrix>>,
    pub a0: A0Record,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ParameterSummary {
    pub fn from_draws(name: impl Into<String>, values: &[f64], level: f64) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let tail = (1.0 - level) / 2.0;
        Self {
            name: name.into(),
            mean,
            sd,
            lower: crate::data::quantile_type7(&sorted, tail),
            upper: crate::data::quantile_type7(&sorted, 1.0 - tail),
        }
    }
}

impl PosteriorDraws {
    pub fn n_draws(&self) -> usize {
        self.beta.rows()
    }

    /// Column names in export order: `beta_1..`, `lambda_s_k`, `lambda0_s_k`.
    /// Strata and intervals are numbered from 1.
    pub fn column_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (1..=self.beta.cols()).map(|p| format!("beta_{p}")).collect();
        let hazard_names = |prefix: &str, sets: &[DrawMatrix], out: &mut Vec<String>| {
            for (s, m) in sets.iter().enumerate() {
                out.extend((1..=m.cols()).map(|k| format!("{prefix}_{}_{k}", s + 1)));
            }
        };
        hazard_names("lambda", &self.lambda, &mut names);
        if let Some(l0) = &self.lambda0 {
            hazard_names("lambda0", l0, &mut names);
        }
        names
    }

    fn columns(&self) -> Vec<Vec<f64>> {
        let mut cols: Vec<Vec<f64>> = (0..self.beta.cols()).map(|p| self.beta.column_vec(p)).collect();
        for m in self.lambda.iter().chain(self.lambda0.iter().flatten()) {
            cols.extend((0..m.cols()).map(|k| m.column_vec(k)));
        }
        cols
    }

    pub fn summarize(&self, level: f64) -> Vec<ParameterSummary> {
        self.column_names()
            .into_iter()
            .zip(self.columns())
            .map(|(name, col)| ParameterSummary::from_draws(name, &col, level))
            .collect()
    }

    /// Writes one row per retained iteration.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.column_names())?;
        let cols = self.columns();
        for i in 0..self.n_draws() {
            w.write_record(cols.iter().map(|c| format!("{}", c[i])))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fills per-stratum hazard matrices row by row.
pub(crate) fn hazard_matrices(n_rows: usize, intervals: &[usize]) -> Vec<DrawMatrix> {
    intervals.iter().map(|&k| DrawMatrix::zeros(n_rows, k)).collect()
}

pub(crate) fn store_hazards(target: &mut [DrawMatrix], row: usize, values: &[Vec<f64>]) {
    for (m, v) in target.iter_mut().zip(values) {
        m.row_mut(row).copy_from_slice(v);
    }
}
