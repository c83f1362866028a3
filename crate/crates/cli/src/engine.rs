//! A loaded model with everything needed to score and explain one patient.

use std::path::{Path, PathBuf};

use log::warn;
use matrisk_core::data::{
    to_features, AccessTable, FeatureVector, PatientRecord, PlausibilityRanges, RiskLevel, FEATURE_NAMES,
};
use matrisk_core::ensemble::{EnsembleError, Metrics, TreeEnsemble, FORMAT_NAME, FORMAT_VERSION};
use matrisk_core::explain::{compose, ComposeOptions, Components, ExplanationBundle, ExplanationType, ModelMeta, Prediction};
use matrisk_core::fuzzy::{FuzzyAssessment, RuleBase};
use matrisk_core::lime::{self, LimeConfig};
use matrisk_core::shap::{self, GlobalImportance};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{AppConfig, PipelineSettings};
use crate::error::{CliError, InputError};
use crate::patient::apply_overrides;

/// What `train` records next to the model file: where the model came from,
/// the rule base and access table it was trained with, and its held-out
/// evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub model_version: String,
    pub data_source: String,
    pub records: usize,
    pub pipeline: PipelineSettings,
    pub train_config_digest: String,
    pub rulebase: String,
    pub access_table: String,
    pub metrics: Metrics,
    pub importance: GlobalImportance,
    pub validation_note: String,
}

/// `model.json` -> `model.train.json`.
pub fn training_record_path(model: &Path) -> PathBuf {
    let stem = model.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    model.with_file_name(format!("{stem}.train.json"))
}

pub fn load_model(path: &Path) -> Result<TreeEnsemble, CliError> {
    if !path.is_file() {
        return Err(CliError::ModelNotFound(path.to_path_buf()));
    }
    TreeEnsemble::load(path).map_err(|e| match e {
        EnsembleError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => {
            CliError::ModelNotFound(path.to_path_buf())
        }
        other => CliError::BadModel(other.to_string()),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assessment {
    pub record: PatientRecord,
    pub features: FeatureVector,
    pub fuzzy: FuzzyAssessment,
    pub prediction: Prediction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub overrides: Value,
    pub predicted_class: RiskLevel,
    pub probability: f64,
    pub probabilities: [f64; 3],
    pub fuzzy_score: f64,
    pub fuzzy_fallback: bool,
}

#[derive(Debug, Clone)]
pub struct Engine {
    pub model: TreeEnsemble,
    pub version: String,
    pub rulebase: RuleBase,
    pub access: AccessTable,
    pub ranges: PlausibilityRanges,
    pub lime: LimeConfig,
    pub compose: ComposeOptions,
    pub training: Option<TrainingRecord>,
}

impl Engine {
    /// Loads the model at `cfg.paths.model` and its training record, if any.
    /// Rule base and access table come from the config when set there, else
    /// from the training record, else the bundled defaults.
    pub fn open(cfg: &AppConfig) -> Result<Self, CliError> {
        let model = load_model(&cfg.paths.model)?;
        let rec_path = training_record_path(&cfg.paths.model);
        let training = match std::fs::read_to_string(&rec_path) {
            Ok(text) => match serde_json::from_str::<TrainingRecord>(&text) {
                Ok(r) if r.model_version == model.digest() => Some(r),
                Ok(_) => {
                    warn!("{} belongs to a different model; ignoring it", rec_path.display());
                    None
                }
                Err(e) => return Err(CliError::BadModel(format!("{}: {e}", rec_path.display()))),
            },
            Err(_) => None,
        };
        let rulebase = match (&cfg.paths.rulebase, &training) {
            (None, Some(t)) => RuleBase::parse(&t.rulebase).map_err(|e| CliError::BadModel(e.to_string()))?,
            _ => cfg.rulebase()?,
        };
        let access = match (&cfg.paths.access_table, &training) {
            (None, Some(t)) => AccessTable::parse(&t.access_table).map_err(|e| CliError::BadModel(e.to_string()))?,
            _ => cfg.access_table()?,
        };
        if let Some(t) = &training {
            if rulebase.to_text() != RuleBase::parse(&t.rulebase).map(|r| r.to_text()).unwrap_or_default() {
                warn!("the configured rule base differs from the one the model was trained with");
            }
        }
        Ok(Self::new(model, rulebase, access, cfg, training))
    }

    pub fn new(
        model: TreeEnsemble,
        rulebase: RuleBase,
        access: AccessTable,
        cfg: &AppConfig,
        training: Option<TrainingRecord>,
    ) -> Self {
        Self {
            version: model.digest(),
            model,
            rulebase,
            access,
            ranges: cfg.ranges.clone(),
            lime: cfg.lime.clone(),
            compose: ComposeOptions::default(),
            training,
        }
    }

    pub fn meta(&self) -> ModelMeta {
        ModelMeta {
            version: self.version.clone(),
            validation_note: self.training.as_ref().map_or_else(
                || "No training record found; held-out performance unknown.".to_string(),
                |t| t.validation_note.clone(),
            ),
        }
    }

    fn internal(e: impl std::fmt::Display) -> CliError {
        CliError::Internal(e.to_string())
    }

    /// Fuzzy score, feature vector and class probabilities. The record must
    /// carry a division.
    pub fn assess(&self, r: &PatientRecord) -> Result<Assessment, CliError> {
        if r.division.is_none() {
            return Err(InputError::single("division", "is required").into());
        }
        let fuzzy = self.rulebase.infer(r);
        let features = to_features(r, fuzzy.score, &self.access).map_err(|e| InputError::single("division", e.to_string()))?;
        let probs = self.model.predict_proba(&features.0).map_err(Self::internal)?;
        Ok(Assessment {
            record: r.clone(),
            features,
            fuzzy,
            prediction: Prediction::from_probabilities(&probs),
        })
    }

    pub fn explain(&self, r: &PatientRecord, kind: ExplanationType) -> Result<ExplanationBundle, CliError> {
        let a = self.assess(r)?;
        let shap = match kind {
            ExplanationType::C => None,
            _ => Some(shap::explain_instance(&self.model, &a.features.0).map_err(Self::internal)?),
        };
        let lime = match (kind, &self.model.feature_stats) {
            (ExplanationType::A, Some(stats)) => {
                Some(lime::explain_prediction(&self.model, &a.features.0, stats, &self.lime).map_err(Self::internal)?)
            }
            _ => None,
        };
        let meta = self.meta();
        let components = Components {
            prediction: &a.prediction,
            fuzzy: Some(&a.fuzzy),
            shap: shap.as_ref(),
            lime: lime.as_ref(),
            record: &a.record,
            rulebase: &self.rulebase,
            model: &meta,
        };
        compose(kind, &components, &self.compose).map_err(Self::internal)
    }

    fn scenario(&self, r: &PatientRecord, overrides: Value) -> Result<Scenario, CliError> {
        let a = self.assess(r)?;
        Ok(Scenario {
            overrides,
            predicted_class: a.prediction.class,
            probability: a.prediction.probability,
            probabilities: a.prediction.probabilities,
            fuzzy_score: a.fuzzy.score,
            fuzzy_fallback: a.fuzzy.fallback,
        })
    }

    /// The baseline plus one scenario per override set.
    pub fn what_if(&self, base: &PatientRecord, overrides: &[Value]) -> Result<(Scenario, Vec<Scenario>), CliError> {
        let baseline = self.scenario(base, json!({}))?;
        let mut out = Vec::with_capacity(overrides.len());
        for (i, o) in overrides.iter().enumerate() {
            let r = apply_overrides(base, o, &self.ranges, &format!("overrides[{i}]."))?;
            out.push(self.scenario(&r, o.clone())?);
        }
        Ok((baseline, out))
    }

    pub fn importance(&self) -> Option<&GlobalImportance> {
        self.training.as_ref().map(|t| &t.importance)
    }

    /// Version, feature order and provenance of the loaded model.
    pub fn describe(&self) -> Value {
        let cfg = self.model.train_config.as_ref();
        json!({
            "model_version": self.version,
            "format": FORMAT_NAME,
            "format_version": FORMAT_VERSION,
            "feature_order": FEATURE_NAMES,
            "classes": self.model.classes,
            "rounds": self.model.rounds(),
            "train_config_digest": cfg.map(|c| c.digest()),
            "train_config": cfg,
            "validation_note": self.meta().validation_note,
            "data_source": self.training.as_ref().map(|t| t.data_source.clone()),
            "metrics": self.training.as_ref().map(|t| &t.metrics),
        })
    }
}
