use serde::{Deserialize, Serialize};

use super::special::chi_square_sf;
use super::{Df, StatsError, TestResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ContingencyTable {
    pub fn new(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        counts: Vec<Vec<u64>>,
    ) -> Result<Self, StatsError> {
        if counts.len() < 2 || counts.len() != row_labels.len() {
            return Err(StatsError::InvalidArgument(
                "table needs at least two labelled rows".into(),
            ));
        }
        if col_labels.len() < 2 || counts.iter().any(|r| r.len() != col_labels.len()) {
            return Err(StatsError::InvalidArgument(
                "table needs at least two labelled columns and equal row lengths".into(),
            ));
        }
        Ok(Self { row_labels, col_labels, counts })
    }

    /// Table with generated labels `r1.. / c1..`.
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self, StatsError> {
        let rows = (1..=counts.len()).map(|i| format!("r{i}")).collect();
        let cols = (1..=counts.first().map_or(0, Vec::len)).map(|i| format!("c{i}")).collect();
        Self::new(rows, cols, counts)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.col_labels.len())
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }
}

/// Pearson chi-square test of independence; df = (r - 1)(c - 1).
pub fn chi_square_independence(t: &ContingencyTable) -> Result<TestResult, StatsError> {
    let n = t.total() as f64;
    let rows = t.row_sums();
    let cols = t.col_sums();
    let mut stat = 0.0;
    for (i, row) in t.counts.iter().enumerate() {
        for (j, &o) in row.iter().enumerate() {
            let e = rows[i] as f64 * cols[j] as f64 / n;
            if !(e > 0.0) {
                return Err(StatsError::ZeroExpectedCount(format!(
                    "{} / {}",
                    t.row_labels[i], t.col_labels[j]
                )));
            }
            stat += (o as f64 - e).powi(2) / e;
        }
    }
    let df = ((rows.len() - 1) * (cols.len() - 1)) as f64;
    Ok(TestResult {
        statistic: stat,
        df: Df::One(df),
        p_value: chi_square_sf(stat, df)?.clamp(0.0, 1.0),
    })
}

/// Pearson goodness-of-fit; df = k - 1.
pub fn chi_square_gof(observed: &[f64], expected: &[f64]) -> Result<TestResult, StatsError> {
    if observed.len() != expected.len() {
        return Err(StatsError::LengthMismatch(observed.len(), expected.len()));
    }
    if observed.len() < 2 {
        return Err(StatsError::TooShort { min: 2, got: observed.len() });
    }
    let mut stat = 0.0;
    for (i, (o, e)) in observed.iter().zip(expected).enumerate() {
        if !(*e > 0.0) {
            return Err(StatsError::ZeroExpectedCount(format!("category {i}")));
        }
        if !(*o >= 0.0) {
            return Err(StatsError::InvalidArgument(format!("negative count in category {i}")));
        }
        stat += (o - e).powi(2) / e;
    }
    let df = (observed.len() - 1) as f64;
    Ok(TestResult {
        statistic: stat,
        df: Df::One(df),
        p_value: chi_square_sf(stat, df)?.clamp(0.0, 1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectSize {
    pub cohens_w: f64,
}

/// w = sqrt(chi2 / n).
pub fn cohens_w(chi2: f64, n: u64) -> Result<EffectSize, StatsError> {
    if n == 0 || !(chi2 >= 0.0) {
        return Err(StatsError::InvalidArgument(format!("cohens_w({chi2}, {n})")));
    }
    Ok(EffectSize {
        cohens_w: (chi2 / n as f64).sqrt(),
    })
}
