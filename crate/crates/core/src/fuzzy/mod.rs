//! Mamdani fuzzy inference producing the 0-100 fuzzy risk score.
//!
//! Inputs are trapezoidal linguistic variables over the six clinical
//! measurements. Rules combine `var IS term` atoms with min (AND), max (OR)
//! and complement (NOT); each rule clips its output term at its activation,
//! the clipped shapes are aggregated by max, and the crisp score is the
//! centroid of the aggregate sampled on a uniform grid.

mod diagnostics;
mod expr;
mod infer;
mod membership;
mod rulebase;
mod variable;

pub use diagnostics::{
    validate_rulebase, CoverageGap, Diagnostics, MonotonicityViolation, MONOTONE_GRID,
    SWEEP_DIVISIONS,
};
pub use expr::{parse_expr, Expr};
pub use infer::{evaluate_rule, infer, FiredRule, Fuzzified, FuzzyAssessment};
pub use membership::{membership, Trapezoid};
pub use rulebase::{FuzzyRule, RuleBase, DEFAULT_RULEBASE};
pub use variable::{fuzzify, LinguisticVariable, Monotone, Severity, Term};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FuzzyError {
    #[error("invalid membership function: {0}")]
    InvalidMembership(String),
    #[error("unknown atom `{var} IS {term}`")]
    UnknownAtom { var: String, term: String },
    #[error("no value supplied for input `{0}`")]
    MissingInput(String),
    #[error("cannot parse rule antecedent: {0}")]
    Parse(String),
    #[error("rule base config: {0}")]
    Config(String),
}
