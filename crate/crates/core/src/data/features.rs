use serde::{Deserialize, Serialize};

use super::{AccessTable, DataError, PatientRecord};

pub const N_FEATURES: usize = 8;

/// Feature order of the model contract. SHAP attributions index into this.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "age",
    "systolic_bp",
    "diastolic_bp",
    "blood_sugar",
    "body_temp",
    "heart_rate",
    "access_score",
    "fuzzy_risk_score",
];

pub const ACCESS_SCORE_INDEX: usize = 6;
pub const FUZZY_SCORE_INDEX: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub [f64; N_FEATURES]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn named(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        FEATURE_NAMES.iter().copied().zip(self.0.iter().copied())
    }
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Assembles the model input for one record.
pub fn to_features(
    r: &PatientRecord,
    fuzzy_score: f64,
    table: &AccessTable,
) -> Result<FeatureVector, DataError> {
    if !(0.0..=100.0).contains(&fuzzy_score) {
        return Err(DataError::InvalidArgument(format!(
            "fuzzy score {fuzzy_score} outside [0, 100]"
        )));
    }
    let division = r
        .division
        .ok_or_else(|| DataError::UnknownDivision("<unassigned>".into()))?;
    let c = r.clinical_values();
    Ok(FeatureVector([
        c[0],
        c[1],
        c[2],
        c[3],
        c[4],
        c[5],
        table.score(division),
        fuzzy_score,
    ]))
}

/// Per-feature mean and sample standard deviation over a training matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl FeatureStats {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Option<Self> {
        let first = rows.first()?;
        let d = first.as_ref().len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r.as_ref()) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r.as_ref()).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let denom = (n - 1.0).max(1.0);
        let std = var.into_iter().map(|s| (s / denom).sqrt()).collect();
        Some(Self { mean, std })
    }
}
