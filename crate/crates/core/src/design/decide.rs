use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// `q0 <= alpha0`.
    TypeOneError,
    /// `q1 >= 1 - alpha1`.
    Power,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SampleSizeDecision {
    Chosen {
        n: usize,
        n_alpha0: usize,
        n_alpha1: usize,
    },
    /// No grid point satisfies the listed constraints.
    Infeasible { binding: Vec<Constraint> },
}

impl fmt::Display for SampleSizeDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Chosen { n, n_alpha0, n_alpha1 } => {
                write!(f, "n = {n} (type I constraint met from {n_alpha0}, power from {n_alpha1})")
            }
            Self::Infeasible { binding } => {
                let names: Vec<&str> = binding
                    .iter()
                    .map(|c| match c {
                        Constraint::TypeOneError => "type I error",
                        Constraint::Power => "power",
                    })
                    .collect();
                write!(f, "infeasible on this grid: {} never satisfied", names.join(" and "))
            }
        }
    }
}

/// `max(n_alpha0, n_alpha1)` with `n_alpha0 = min{n : q0 <= alpha0}` and
/// `n_alpha1 = min{n : q1 >= 1 - alpha1}`, applied literally to the grid
/// even when the estimates are not monotone in `n`.
pub fn decide_sample_size(
    results: &BTreeMap<usize, (f64, f64)>,
    alpha0: f64,
    alpha1: f64,
) -> Result<SampleSizeDecision> {
    if results.is_empty() {
        return Err(Error::config("design.grid", "no sample sizes evaluated"));
    }
    for (name, a) in [("alpha0", alpha0), ("alpha1", alpha1)] {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::config(name, format!("must lie in [0, 1], got {a}")));
        }
    }
    let n_alpha0 = results.iter().find(|(_, (q0, _))| *q0 <= alpha0).map(|(n, _)| *n);
    let n_alpha1 = results.iter().find(|(_, (_, q1))| *q1 >= 1.0 - alpha1).map(|(n, _)| *n);
    Ok(match (n_alpha0, n_alpha1) {
        (Some(a), Some(b)) => SampleSizeDecision::Chosen {
            n: a.max(b),
            n_alpha0: a,
            n_alpha1: b,
        },
        (a, b) => {
            let mut binding = Vec::new();
            if a.is_none() {
                binding.push(Constraint::TypeOneError);
            }
            if b.is_none() {
                binding.push(Constraint::Power);
            }
            SampleSizeDecision::Infeasible { binding }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point() {
        let grid = BTreeMap::from([(100, (0.04, 0.85))]);
        assert_eq!(
            decide_sample_size(&grid, 0.05, 0.2).unwrap(),
            SampleSizeDecision::Chosen {
                n: 100,
                n_alpha0: 100,
                n_alpha1: 100
            }
        );
    }

    #[test]
    fn rule_applied() {
        let grid = BTreeMap::from([(100, (0.08, 0.6)), (200, (0.04, 0.75)), (300, (0.03, 0.83))]);
        assert_eq!(
            decide_sample_size(&grid, 0.05, 0.2).unwrap(),
            SampleSizeDecision::Chosen {
                n: 300,
                n_alpha0: 200,
                n_alpha1: 300
            }
        );
    }

    #[test]
    fn infeasible_names_constraint() {
        let grid = BTreeMap::from([(100, (0.01, 0.3))]);
        let d = decide_sample_size(&grid, 0.05, 0.2).unwrap();
        assert_eq!(
            d,
            SampleSizeDecision::Infeasible {
                binding: vec![Constraint::Power]
            }
        );
        assert!(d.to_string().contains("power"));
    }
}
