use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Enrollment {
    /// Uniform on `(0, period)`.
    Uniform { period: f64 },
    /// Independent exponential enrollment times.
    Exponential { rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Censoring {
    None,
    /// Uniform on `(0, upper)`.
    Uniform { upper: f64 },
    Exponential { rate: f64 },
    Constant { time: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dropout {
    pub probability: f64,
    /// Dropout times are uniform on `(0, bound)`.
    pub bound: f64,
}

/// Settings for generating one hypothetical trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialDesignConfig {
    pub n_subjects: usize,
    pub target_events: usize,
    pub enrollment: Enrollment,
    #[serde(default = "default_randomization")]
    pub randomization: f64,
    /// Covariate value given to treated subjects; controls get 0.
    #[serde(default = "default_treatment_value")]
    pub treatment_value: f64,
    #[serde(default = "default_censoring")]
    pub censoring: Censoring,
    #[serde(default)]
    pub dropout: Option<Dropout>,
    #[serde(default)]
    pub t_min: f64,
    /// Administrative end of follow-up; unbounded when absent.
    #[serde(default)]
    pub t_max: Option<f64>,
}

fn default_randomization() -> f64 {
    0.5
}

fn default_treatment_value() -> f64 {
    1.0
}

fn default_censoring() -> Censoring {
    Censoring::None
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(path, format!("must be positive and finite, got {v}")))
    }
}

fn probability(path: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::config(path, format!("must lie in [0, 1], got {v}")))
    }
}

impl TrialDesignConfig {
    /// `n` subjects, stop at `target_events` events, uniform enrollment over
    /// `period`, no censoring before the analysis cutoff.
    pub fn new(n_subjects: usize, target_events: usize, period: f64) -> Self {
        Self {
            n_subjects,
            target_events,
            enrollment: Enrollment::Uniform { period },
            randomization: default_randomization(),
            treatment_value: default_treatment_value(),
            censoring: Censoring::None,
            dropout: None,
            t_min: 0.0,
            t_max: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_events == 0 {
            return Err(Error::config("design.target_events", "must be at least 1"));
        }
        if self.n_subjects < self.target_events {
            return Err(Error::config(
                "design.n_subjects",
                format!(
                    "{} subjects cannot produce {} events",
                    self.n_subjects, self.target_events
                ),
            ));
        }
        match self.enrollment {
            Enrollment::Uniform { period } => positive("design.enrollment.period", period)?,
            Enrollment::Exponential { rate } => positive("design.enrollment.rate", rate)?,
        }
        probability("design.randomization", self.randomization)?;
        if !(self.treatment_value.is_finite() && self.treatment_value != 0.0) {
            return Err(Error::config("design.treatment_value", "must be finite and nonzero"));
        }
        match self.censoring {
            Censoring::None => {}
            Censoring::Uniform { upper } => positive("design.censoring.upper", upper)?,
            Censoring::Exponential { rate } => positive("design.censoring.rate", rate)?,
            Censoring::Constant { time } => {
                if !(time >= 0.0 && time.is_finite()) {
                    return Err(Error::config(
                        "design.censoring.time",
                        format!("must be nonnegative and finite, got {time}"),
                    ));
                }
            }
        }
        if let Some(d) = self.dropout {
            probability("design.dropout.probability", d.probability)?;
            positive("design.dropout.bound", d.bound)?;
        }
        if !(self.t_min >= 0.0 && self.t_min.is_finite()) {
            return Err(Error::config("design.t_min", format!("must be nonnegative, got {}", self.t_min)));
        }
        if let Some(t_max) = self.t_max {
            positive("design.t_max", t_max)?;
            if self.t_min > t_max {
                return Err(Error::config(
                    "design.t_min",
                    format!("t_min {} exceeds t_max {t_max}", self.t_min),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_with_defaults() {
        let text = r#"
            n_subjects = 30
            target_events = 10
            enrollment = { kind = "uniform", period = 4.0 }
            dropout = { probability = 0.1, bound = 5.0 }
        "#;
        let cfg: TrialDesignConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.randomization, 0.5);
        assert_eq!(cfg.censoring, Censoring::None);
        assert!(cfg.validate().is_ok());
        let back: TrialDesignConfig = toml::from_str(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn invariants_enforced() {
        let mut cfg = TrialDesignConfig::new(5, 10, 4.0);
        assert!(cfg.validate().is_err());
        cfg = TrialDesignConfig::new(10, 5, 4.0);
        cfg.t_min = 3.0;
        cfg.t_max = Some(2.0);
        assert!(cfg.validate().is_err());
        cfg.t_max = None;
        cfg.randomization = 1.5;
        assert!(cfg.validate().is_err());
    }
}
