use serde::{Deserialize, Serialize};

use super::special::f_sf;
use super::{Df, StatsError, TestResult};

/// Mean, sample standard deviation (n - 1 denominator) and size of a group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub mean: f64,
    pub sd: f64,
    pub n: u64,
}

impl GroupSummary {
    pub fn new(mean: f64, sd: f64, n: u64) -> Self {
        Self { mean, sd, n }
    }

    pub fn from_values(xs: &[f64]) -> Option<Self> {
        if xs.len() < 2 {
            return None;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Some(Self::new(mean, var.sqrt(), xs.len() as u64))
    }
}

/// One-way ANOVA computed from group summaries alone.
pub fn anova_from_summary(groups: &[GroupSummary]) -> Result<TestResult, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups);
    }
    for (i, g) in groups.iter().enumerate() {
        if g.n < 2 || !(g.sd >= 0.0) || !g.mean.is_finite() {
            return Err(StatsError::InvalidArgument(format!(
                "group {i} needs n >= 2, finite mean and sd >= 0"
            )));
        }
    }
    let k = groups.len() as f64;
    let n_total: f64 = groups.iter().map(|g| g.n as f64).sum();
    let grand = groups.iter().map(|g| g.n as f64 * g.mean).sum::<f64>() / n_total;
    let ss_between: f64 = groups.iter().map(|g| g.n as f64 * (g.mean - grand).powi(2)).sum();
    let ss_within: f64 = groups.iter().map(|g| (g.n as f64 - 1.0) * g.sd * g.sd).sum();
    let (d1, d2) = (k - 1.0, n_total - k);
    let (f, p) = if ss_within == 0.0 {
        if ss_between == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY, 0.0)
        }
    } else {
        let f = (ss_between / d1) / (ss_within / d2);
        (f, f_sf(f, d1, d2)?)
    };
    Ok(TestResult {
        statistic: f,
        df: Df::Pair(d1, d2),
        p_value: p.clamp(0.0, 1.0),
    })
}
