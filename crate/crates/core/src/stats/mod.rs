//! Validation statistics: rank correlation, chi-square tests, effect size,
//! one-way ANOVA from group summaries, chi-square power and survey
//! aggregation.

mod anova;
mod chisq;
mod correlation;
mod power;
pub mod special;
mod survey;

pub use anova::{anova_from_summary, GroupSummary};
pub use chisq::{chi_square_gof, chi_square_independence, cohens_w, ContingencyTable, EffectSize};
pub use correlation::{average_ranks, spearman, EXACT_PERMUTATION_MAX_N};
pub use power::{chi_square_power, noncentral_chi_square_sf, SERIES_TOL};
pub use survey::{
    aggregate_survey, survey_report, ClaritySummary, DemographicGroup, MultiSelect, PowerCase,
    PreferenceTable, Proportion, SurveyAggregates, SurveyCounts, SurveyReport, TrustTable,
    DEFAULT_SURVEY_COUNTS,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("inputs have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {min} observations, got {got}")]
    TooShort { min: usize, got: usize },
    #[error("input is constant; correlation undefined")]
    ConstantInput,
    #[error("expected count is zero in cell {0}")]
    ZeroExpectedCount(String),
    #[error("need at least two groups")]
    TooFewGroups,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("inconsistent totals: {0}")]
    InconsistentTotals(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("survey file: {0}")]
    Parse(String),
}

/// Degrees of freedom: one value, or a (numerator, denominator) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Df {
    One(f64),
    Pair(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub df: Df,
    pub p_value: f64,
}
