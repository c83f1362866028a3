use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{FuzzyError, Trapezoid};

/// Clinical reading attached to a term, used for parameter flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Normal,
    Elevated,
    Critical,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Normal => "normal",
            Severity::Elevated => "elevated",
            Severity::Critical => "critical",
        })
    }
}

impl FromStr for Severity {
    type Err = FuzzyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "normal" => Ok(Severity::Normal),
            "elevated" => Ok(Severity::Elevated),
            "critical" => Ok(Severity::Critical),
            other => Err(FuzzyError::Config(format!("unknown severity `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotone {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub mf: Trapezoid,
    pub severity: Severity,
    /// Human-readable name used in rendered explanations.
    pub display: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinguisticVariable {
    pub name: String,
    pub domain: (f64, f64),
    pub unit: String,
    pub terms: Vec<Term>,
    /// Declared direction in which the risk output should move as this input grows.
    pub monotone: Option<Monotone>,
}

impl LinguisticVariable {
    pub fn new(name: impl Into<String>, domain: (f64, f64), unit: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            domain,
            unit: unit.into(),
            terms: Vec::new(),
            monotone: None,
        }
    }

    pub fn with_term(mut self, name: &str, mf: Trapezoid, severity: Severity) -> Self {
        self.terms.push(Term {
            name: name.to_string(),
            mf,
            severity,
            display: name.replace('_', " "),
        });
        self
    }

    pub fn term(&self, name: &str) -> Option<(usize, &Term)> {
        self.terms.iter().enumerate().find(|(_, t)| t.name == name)
    }

    pub fn clamp(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain;
        if x < lo || x > hi {
            log::debug!("{}: input {x} clamped to [{lo}, {hi}]", self.name);
        }
        x.clamp(lo, hi)
    }

    /// Degrees per term, in term order, for `x` clamped to the domain.
    pub fn degrees(&self, x: f64) -> Vec<f64> {
        let x = self.clamp(x);
        self.terms.iter().map(|t| t.mf.degree(x)).collect()
    }

    /// Term with the highest membership at `x`; ties go to the later
    /// (more severe) term.
    pub fn dominant_term(&self, x: f64) -> Option<&Term> {
        let degrees = self.degrees(x);
        let mut best: Option<(usize, f64)> = None;
        for (i, d) in degrees.iter().enumerate() {
            if best.is_none_or(|(_, bd)| *d >= bd) {
                best = Some((i, *d));
            }
        }
        best.map(|(i, _)| &self.terms[i])
    }

    pub(crate) fn check(&self) -> Result<(), FuzzyError> {
        let (lo, hi) = self.domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(FuzzyError::Config(format!(
                "variable {}: invalid domain [{lo}, {hi}]",
                self.name
            )));
        }
        if self.terms.is_empty() {
            return Err(FuzzyError::Config(format!("variable {} has no terms", self.name)));
        }
        for (i, t) in self.terms.iter().enumerate() {
            if t.mf.a < lo || t.mf.d > hi {
                return Err(FuzzyError::Config(format!(
                    "variable {}: term {} support [{}, {}] leaves the domain [{lo}, {hi}]",
                    self.name, t.name, t.mf.a, t.mf.d
                )));
            }
            if self.terms[..i].iter().any(|o| o.name == t.name) {
                return Err(FuzzyError::Config(format!(
                    "variable {}: duplicate term {}",
                    self.name, t.name
                )));
            }
        }
        Ok(())
    }
}

/// One degree per term of `v` at `x`, keyed by term name.
pub fn fuzzify(v: &LinguisticVariable, x: f64) -> Vec<(String, f64)> {
    v.terms
        .iter()
        .map(|t| t.name.clone())
        .zip(v.degrees(x))
        .collect()
}
