//! Differences between two run summaries.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::config::ExperimentKind;
use super::run::Summary;
use crate::error::{Error, Result};

/// Absolute tolerances: `default` for every quantity, overridden per key.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default)]
    pub default: f64,
    #[serde(default)]
    pub keys: BTreeMap<String, f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances::uniform(0.0)
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Tolerances {
            default: tol,
            keys: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, tol: f64) -> Self {
        self.keys.insert(key.into(), tol);
        self
    }

    pub fn for_key(&self, key: &str) -> f64 {
        self.keys.get(key).copied().unwrap_or(self.default)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Values differ but within tolerance.
    Within,
    /// Values differ beyond tolerance.
    Exceeds,
    /// Present in one summary only.
    Absent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Difference {
    pub key: String,
    pub a: Option<String>,
    pub b: Option<String>,
    pub difference: Option<f64>,
    pub tolerance: Option<f64>,
    pub status: Status,
}

impl Difference {
    pub fn passed(&self) -> bool {
        self.status == Status::Within
    }
}

/// Every key on which two summaries disagree, with its verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub experiment: ExperimentKind,
    pub differences: Vec<Difference>,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        self.differences.iter().all(Difference::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Difference> {
        self.differences.iter().filter(|d| !d.passed())
    }
}

/// Compares the fitted quantities (against tolerances) and the labels
/// (exactly) of two summaries of the same experiment.
pub fn compare(a: &Summary, b: &Summary, tol: &Tolerances) -> Result<Comparison> {
    if a.experiment != b.experiment {
        return Err(Error::MismatchedExperiments {
            a: a.experiment.to_string(),
            b: b.experiment.to_string(),
        });
    }
    let mut differences = Vec::new();
    let keys: BTreeSet<&String> = a.quantities.keys().chain(b.quantities.keys()).collect();
    for key in keys {
        let (x, y) = (a.quantities.get(key), b.quantities.get(key));
        let fmt = |v: Option<&f64>| v.map(|v| crate::integrate::format_value(*v));
        match (x, y) {
            (Some(x), Some(y)) if x == y => {}
            (Some(x), Some(y)) => {
                let d = (x - y).abs();
                let t = tol.for_key(key);
                differences.push(Difference {
                    key: key.clone(),
                    a: fmt(Some(x)),
                    b: fmt(Some(y)),
                    difference: Some(d),
                    tolerance: Some(t),
                    status: if d <= t { Status::Within } else { Status::Exceeds },
                });
            }
            _ => differences.push(Difference {
                key: key.clone(),
                a: fmt(x),
                b: fmt(y),
                difference: None,
                tolerance: None,
                status: Status::Absent,
            }),
        }
    }
    let labels: BTreeSet<&String> = a.labels.keys().chain(b.labels.keys()).collect();
    for key in labels {
        let (x, y) = (a.labels.get(key), b.labels.get(key));
        if x != y {
            differences.push(Difference {
                key: key.clone(),
                a: x.cloned(),
                b: y.cloned(),
                difference: None,
                tolerance: None,
                status: if x.is_some() && y.is_some() {
                    Status::Exceeds
                } else {
                    Status::Absent
                },
            });
        }
    }
    Ok(Comparison {
        experiment: a.experiment,
        differences,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::run::Provenance;

    fn summary(kind: ExperimentKind, pairs: &[(&str, f64)]) -> Summary {
        Summary {
            experiment: kind,
            quantities: pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            labels: BTreeMap::new(),
            files: Vec::new(),
            provenance: Provenance {
                config_hash: String::new(),
                code_version: String::new(),
                seed: 0,
            },
        }
    }

    #[test]
    fn identical_summaries_pass_with_empty_diff() {
        let a = summary(ExperimentKind::BurgersShock, &[("exponent", 2.6667), ("prefactor", 0.8)]);
        let c = compare(&a, &a.clone(), &Tolerances::default()).unwrap();
        assert!(c.differences.is_empty());
        assert!(c.passed());
    }

    #[test]
    fn exponent_outside_tolerance_fails_on_that_key() {
        let a = summary(ExperimentKind::BurgersShock, &[("exponent", 2.60), ("prefactor", 0.8)]);
        let b = summary(ExperimentKind::BurgersShock, &[("exponent", 2.6667), ("prefactor", 0.8)]);
        let c = compare(&a, &b, &Tolerances::uniform(0.05)).unwrap();
        assert!(!c.passed());
        let failed: Vec<&str> = c.failures().map(|d| d.key.as_str()).collect();
        assert_eq!(failed, ["exponent"]);
        let ok = compare(&a, &b, &Tolerances::uniform(0.0).with("exponent", 0.1)).unwrap();
        assert!(ok.passed());
        assert_eq!(ok.differences.len(), 1);
    }

    #[test]
    fn missing_key_is_reported_absent() {
        let a = summary(ExperimentKind::Recurrence, &[("first_recovery", 0.98)]);
        let b = summary(ExperimentKind::Recurrence, &[]);
        let c = compare(&a, &b, &Tolerances::uniform(1.0)).unwrap();
        assert!(!c.passed());
        assert_eq!(c.differences[0].status, Status::Absent);
        assert_eq!(c.differences[0].b, None);
    }

    #[test]
    fn mismatched_kinds_are_an_error() {
        let a = summary(ExperimentKind::Recurrence, &[]);
        let b = summary(ExperimentKind::TodaDrift, &[]);
        assert!(matches!(
            compare(&a, &b, &Tolerances::default()),
            Err(Error::MismatchedExperiments { .. })
        ));
    }
}
