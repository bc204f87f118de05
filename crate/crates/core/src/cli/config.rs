use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::Schema;
use crate::design::{HypothesisSpec, Resampling};
use crate::error::{Error, Result};
use crate::model::PriorSpec;
use crate::samplers::SamplerConfig;
use crate::sim::{Censoring, Dropout, Enrollment};

/// Fully resolved run configuration; echoed into every result file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; drawn from entropy and recorded when absent.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub partition: PartitionConfig,
    #[serde(default)]
    pub prior: PriorSpec,
    #[serde(default)]
    pub a0: A0Config,
    #[serde(default)]
    pub sampler: SamplerSection,
    #[serde(default)]
    pub mixture: MixtureConfig,
    #[serde(default)]
    pub design: DesignSection,
    #[serde(default)]
    pub hypothesis: HypothesisSpec,
}

fn default_workers() -> usize {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub time: String,
    pub event: String,
    #[serde(default)]
    pub stratum: Option<String>,
    pub covariates: Vec<String>,
    #[serde(default)]
    pub current: Option<SourceConfig>,
    #[serde(default)]
    pub historical: Vec<SourceConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub path: PathBuf,
    #[serde(default)]
    pub filter: Option<FilterConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    pub column: String,
    pub value: String,
}

impl DataConfig {
    pub fn schema(&self, source: &SourceConfig) -> Schema {
        let covs: Vec<&str> = self.covariates.iter().map(String::as_str).collect();
        let schema = Schema::new(&self.time, &self.event, self.stratum.as_deref(), &covs);
        match &source.filter {
            Some(f) => schema.with_filter(&f.column, &f.value),
            None => schema,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    /// Interval count per stratum.
    #[serde(default)]
    pub intervals: Vec<usize>,
    /// Explicit interior change points per stratum; overrides the
    /// equal-events default when given.
    #[serde(default)]
    pub cuts: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct A0Config {
    /// Fixed discounting vector, one entry per historical dataset.
    #[serde(default)]
    pub value: Option<Vec<f64>>,
    /// Grid of fixed vectors for design runs.
    #[serde(default)]
    pub grid: Option<Vec<Vec<f64>>>,
    /// Beta prior shapes per historical dataset for random `a0`.
    #[serde(default)]
    pub shape1: Option<Vec<f64>>,
    #[serde(default)]
    pub shape2: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSection {
    pub n_mc: usize,
    pub n_burnin: usize,
    pub beta_width: f64,
    pub log_hazard_width: f64,
    pub max_steps: u32,
    /// Credible-interval level of JSON summaries.
    pub level: f64,
}

impl Default for SamplerSection {
    fn default() -> Self {
        let d = SamplerConfig::default();
        Self {
            n_mc: d.n_mc,
            n_burnin: d.n_burnin,
            beta_width: d.beta_width,
            log_hazard_width: d.log_hazard_width,
            max_steps: d.max_steps,
            level: 0.95,
        }
    }
}

impl SamplerSection {
    pub fn to_config(&self, seed: u64) -> Result<SamplerConfig> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::config("sampler.level", "must lie in (0, 1)"));
        }
        let cfg = SamplerConfig {
            n_mc: self.n_mc,
            n_burnin: self.n_burnin,
            beta_width: self.beta_width,
            log_hazard_width: self.log_hazard_width,
            max_steps: self.max_steps,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureConfig {
    /// JSON mixture file; approximated from the `a0` Beta prior when absent.
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Outer draws of the prior approximation; defaults to `sampler.n_mc`.
    #[serde(default)]
    pub n_draws: Option<usize>,
}

/// A sampling prior as configured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SamplingPriorConfig {
    /// Historical posterior at full borrowing truncated to the null or
    /// alternative side.
    Default,
    Point {
        beta: Vec<f64>,
        lambda: Vec<Vec<f64>>,
    },
    /// Delimited matrices: one for `beta`, one per stratum for `lambda`.
    Files {
        beta: PathBuf,
        lambda: Vec<PathBuf>,
        #[serde(default = "independent")]
        resampling: Resampling,
    },
}

fn independent() -> Resampling {
    Resampling::Independent
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignSection {
    pub n_trials: usize,
    /// Grid of target event counts.
    pub target_events: Vec<usize>,
    /// Subjects per target event; ignored when `n_subjects` is given.
    pub subjects_per_event: f64,
    pub n_subjects: Option<Vec<usize>>,
    pub enrollment: Enrollment,
    pub randomization: f64,
    pub treatment_value: f64,
    pub censoring: Censoring,
    pub dropout: Option<Dropout>,
    pub t_min: f64,
    pub t_max: Option<f64>,
    /// Interval counts of the generation partition; `partition.intervals`
    /// when empty.
    pub generation_intervals: Vec<usize>,
    pub null_prior: Option<SamplingPriorConfig>,
    pub alternative_prior: Option<SamplingPriorConfig>,
    pub max_failure_rate: f64,
    /// Store per-trial records in the JSON output.
    pub keep_trials: bool,
    pub alpha0: Option<f64>,
    pub alpha1: Option<f64>,
}

impl Default for DesignSection {
    fn default() -> Self {
        Self {
            n_trials: 1000,
            target_events: Vec::new(),
            subjects_per_event: 3.0,
            n_subjects: None,
            enrollment: Enrollment::Uniform { period: 4.0 },
            randomization: 0.5,
            treatment_value: 1.0,
            censoring: Censoring::None,
            dropout: None,
            t_min: 0.0,
            t_max: None,
            generation_intervals: Vec::new(),
            null_prior: None,
            alternative_prior: None,
            max_failure_rate: 0.01,
            keep_trials: false,
            alpha0: None,
            alpha1: None,
        }
    }
}

/// Reads a TOML configuration and applies `key=value` overrides, where
/// `key` is a dotted path and `value` is parsed as TOML (bare words fall
/// back to strings).
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", p.display())))?,
        None => String::new(),
    };
    parse_config(&text, overrides)
}

/// As [`load_config`] but from TOML text.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config("config", e.to_string()))?;
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| Error::config("--set", format!("`{item}` is not of the form key=value")))?;
        set_path(&mut table, key.trim(), parse_value(raw.trim()))?;
    }
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::config("config", e.message().to_string()))
}

fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| Error::config("--set", "empty key"))?;
    let mut cur = table;
    for part in parts {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(key, format!("`{part}` is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_apply() {
        let cfg = load_config(
            None,
            &[
                "seed=7".into(),
                "sampler.n_mc=50".into(),
                "a0.value=[0.5]".into(),
                "out=results".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.sampler.n_mc, 50);
        assert_eq!(cfg.a0.value, Some(vec![0.5]));
        assert_eq!(cfg.out, PathBuf::from("results"));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(load_config(None, &["sampler.nmc=5".into()]).is_err());
        assert!(load_config(None, &["nonsense".into()]).is_err());
    }

    #[test]
    fn echo_round_trips() {
        let cfg = load_config(None, &["design.target_events=[350]".into()]).unwrap();
        let text = toml::to_string(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }
}
