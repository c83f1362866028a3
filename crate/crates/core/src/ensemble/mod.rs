//! Gradient-boosted decision trees for three-class risk prediction.

mod metrics;
mod persist;
mod train;
mod tree;

pub use metrics::{evaluate, roc_auc, Metrics};
pub use persist::{FORMAT_NAME, FORMAT_VERSION};
pub use train::{balanced_class_weights, sample_weights, train, train_with_history, TrainOutcome};
pub use tree::{Node, Tree};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::data::FeatureStats;

pub const N_CLASSES: usize = 3;
pub const CLASS_NAMES: [&str; N_CLASSES] = ["low", "mid", "high"];

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("training labels contain fewer than two classes")]
    DegenerateLabels,
    #[error("non-finite feature value at row {row}, column {column}")]
    NonFiniteFeature { row: usize, column: usize },
    #[error("feature vector has {got} values, model expects {expected}")]
    BadVectorLength { expected: usize, got: usize },
    #[error("evaluation set is empty")]
    EmptyTestSet,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("model file has format version {found}, this build reads version {expected}")]
    VersionMismatch { found: u64, expected: u64 },
    #[error("corrupt model file: {0}")]
    CorruptFile(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub l1_penalty: f64,
    pub l2_penalty: f64,
    pub min_child_weight: f64,
    /// Per-class instance weights; `None` means balanced inverse frequency.
    pub class_weights: Option<[f64; N_CLASSES]>,
    /// Recorded for provenance. Training itself draws no random numbers.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            rounds: 400,
            max_depth: 5,
            learning_rate: 0.05,
            l1_penalty: 0.1,
            l2_penalty: 1.0,
            min_child_weight: 1.0,
            class_weights: None,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), EnsembleError> {
        let bad = |m: &str| Err(EnsembleError::InvalidConfig(m.to_string()));
        if self.rounds == 0 {
            return bad("rounds must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must be in (0, 1]");
        }
        if !(self.l1_penalty >= 0.0 && self.l2_penalty >= 0.0) {
            return bad("penalties must be non-negative");
        }
        if !(self.min_child_weight >= 0.0) {
            return bad("min_child_weight must be non-negative");
        }
        if let Some(w) = self.class_weights {
            if w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return bad("class weights must be positive");
            }
        }
        Ok(())
    }

    /// Short hex digest of the config, for provenance records.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex12(Sha256::digest(json.as_bytes()).as_slice())
    }
}

fn hex12(bytes: &[u8]) -> String {
    bytes.iter().take(6).map(|b| format!("{b:02x}")).collect()
}

/// A trained additive tree model. `trees[r][k]` is round `r`'s tree for
/// class `k`; the class-`k` margin is
/// `base_score[k] + learning_rate * sum_r trees[r][k](x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsemble {
    pub feature_names: Vec<String>,
    pub classes: Vec<String>,
    pub base_score: Vec<f64>,
    pub learning_rate: f64,
    pub trees: Vec<Vec<Tree>>,
    pub train_config: Option<TrainConfig>,
    /// Mean and standard deviation of the training matrix.
    #[serde(default)]
    pub feature_stats: Option<FeatureStats>,
}

impl TreeEnsemble {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn rounds(&self) -> usize {
        self.trees.len()
    }

    /// Trees of one class, one per round.
    pub fn class_trees(&self, k: usize) -> impl Iterator<Item = &Tree> {
        self.trees.iter().map(move |r| &r[k])
    }

    fn check_len(&self, x: &[f64]) -> Result<(), EnsembleError> {
        if x.len() != self.n_features() {
            return Err(EnsembleError::BadVectorLength {
                expected: self.n_features(),
                got: x.len(),
            });
        }
        if let Some(column) = x.iter().position(|v| !v.is_finite()) {
            return Err(EnsembleError::NonFiniteFeature { row: 0, column });
        }
        Ok(())
    }

    pub fn predict_margin(&self, x: &[f64]) -> Result<Vec<f64>, EnsembleError> {
        self.check_len(x)?;
        let mut m = self.base_score.clone();
        for round in &self.trees {
            for (k, t) in round.iter().enumerate() {
                m[k] += self.learning_rate * t.predict(x);
            }
        }
        Ok(m)
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>, EnsembleError> {
        Ok(softmax(&self.predict_margin(x)?))
    }

    /// Argmax class index; exact ties go to the higher class.
    pub fn predict(&self, x: &[f64]) -> Result<usize, EnsembleError> {
        Ok(argmax_high(&self.predict_proba(x)?))
    }

    /// Short hex digest of the serialized model.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("model serializes");
        hex12(Sha256::digest(json.as_bytes()).as_slice())
    }
}

pub fn softmax(m: &[f64]) -> Vec<f64> {
    let max = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = m.iter().map(|v| (v - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Index of the largest value, preferring the later index on ties.
pub fn argmax_high(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in p.iter().enumerate() {
        if *v >= p[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_ties_prefer_higher_class() {
        assert_eq!(argmax_high(&[0.4, 0.4, 0.2]), 1);
        assert_eq!(argmax_high(&[1.0 / 3.0; 3]), 2);
        assert_eq!(argmax_high(&[0.5, 0.3, 0.2]), 0);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        assert!(matches!(bad.validate(), Err(EnsembleError::InvalidConfig(_))));
    }
}
