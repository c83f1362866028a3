use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EnsembleError, TreeEnsemble};

pub const FORMAT_NAME: &str = "matrisk-tree-ensemble";
pub const FORMAT_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u64,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u64,
    model: TreeEnsemble,
}

impl TreeEnsemble {
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format: FORMAT_NAME.to_string(),
            version: FORMAT_VERSION,
            model: self.clone(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, EnsembleError> {
        let corrupt = |m: String| EnsembleError::CorruptFile(m);
        let header: Header = serde_json::from_str(text).map_err(|e| corrupt(e.to_string()))?;
        if header.format != FORMAT_NAME {
            return Err(corrupt(format!("unexpected format `{}`", header.format)));
        }
        if header.version != FORMAT_VERSION {
            return Err(EnsembleError::VersionMismatch {
                found: header.version,
                expected: FORMAT_VERSION,
            });
        }
        let file: ModelFile = serde_json::from_str(text).map_err(|e| corrupt(e.to_string()))?;
        let m = file.model;
        if m.feature_names.is_empty() || m.classes.is_empty() {
            return Err(corrupt("model has no features or classes".into()));
        }
        if m.base_score.len() != m.n_classes() {
            return Err(corrupt("base_score length differs from class count".into()));
        }
        if !(m.learning_rate.is_finite() && m.learning_rate > 0.0) {
            return Err(corrupt("learning_rate must be positive".into()));
        }
        for (r, round) in m.trees.iter().enumerate() {
            if round.len() != m.n_classes() {
                return Err(corrupt(format!("round {r} has {} trees", round.len())));
            }
            for (k, t) in round.iter().enumerate() {
                if let Some(e) = t.structural_error(m.n_features()) {
                    return Err(corrupt(format!("round {r} class {k}: {e}")));
                }
            }
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), EnsembleError> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|source| EnsembleError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EnsembleError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| EnsembleError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}
