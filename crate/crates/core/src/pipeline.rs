//! End-to-end training: load, assign divisions, score with the rule base,
//! split, train and evaluate.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{
    augment_access, load_csv, load_reader, split, surrogate, to_features, AccessTable,
    DataError, Dataset, FeatureStats, FeatureVector, PatientRecord, PlausibilityRanges,
    FEATURE_NAMES,
};
use crate::ensemble::{self, EnsembleError, Metrics, TrainConfig, TreeEnsemble};
use crate::fuzzy::RuleBase;

/// Environment variable naming a local copy of the UCI Maternal Health Risk
/// CSV. When unset, the bundled surrogate generator is used.
pub const UCI_CSV_ENV: &str = "MATRISK_UCI_CSV";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] EnsembleError),
    #[error("record {0} has no risk label")]
    Unlabelled(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DataSource {
    Csv(PathBuf),
    Surrogate { seed: u64 },
}

impl DataSource {
    /// The CSV named by [`UCI_CSV_ENV`], else the surrogate with its default seed.
    pub fn from_env() -> Self {
        match std::env::var_os(UCI_CSV_ENV) {
            Some(p) if !p.is_empty() => DataSource::Csv(PathBuf::from(p)),
            _ => DataSource::Surrogate {
                seed: surrogate::DEFAULT_SEED,
            },
        }
    }

    pub fn describe(&self) -> String {
        match self {
            DataSource::Csv(p) => format!("CSV {}", p.display()),
            DataSource::Surrogate { seed } => format!("synthetic surrogate (seed {seed})"),
        }
    }

    /// Loads and cleans the records. The surrogate goes through the same CSV
    /// reader and cleaning as a real file.
    pub fn load(&self, ranges: &PlausibilityRanges) -> Result<Dataset, DataError> {
        match self {
            DataSource::Csv(p) => load_csv(p, ranges),
            DataSource::Surrogate { seed } => {
                let mut buf = Vec::new();
                surrogate::write_csv(&surrogate::generate(*seed), &mut buf)
                    .expect("writing to memory cannot fail");
                load_reader(buf.as_slice(), &self.describe(), ranges)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub augment_seed: u64,
    pub split_seed: u64,
    pub test_fraction: f64,
    pub stratified: bool,
    pub train: TrainConfig,
    pub rulebase: RuleBase,
    pub access: AccessTable,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            augment_seed: 42,
            split_seed: 42,
            test_fraction: 0.2,
            stratified: true,
            train: TrainConfig::default(),
            rulebase: RuleBase::default(),
            access: AccessTable::default(),
        }
    }
}

/// Records with their model inputs and class indices.
#[derive(Debug, Clone)]
pub struct Featurized {
    pub records: Vec<PatientRecord>,
    pub x: Vec<FeatureVector>,
    pub y: Vec<usize>,
}

/// Fuzzy-scores every record and assembles feature vectors. Records must
/// carry a division and a label.
pub fn featurize(
    records: &[PatientRecord],
    rb: &RuleBase,
    table: &AccessTable,
) -> Result<Featurized, PipelineError> {
    let mut x = Vec::with_capacity(records.len());
    let mut y = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        let score = rb.infer(r).score;
        x.push(to_features(r, score, table)?);
        y.push(r.risk_label.ok_or(PipelineError::Unlabelled(i))?.index());
    }
    Ok(Featurized {
        records: records.to_vec(),
        x,
        y,
    })
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub model: TreeEnsemble,
    pub metrics: Metrics,
    pub loss_history: Vec<f64>,
    pub train: Featurized,
    pub test: Featurized,
    pub feature_stats: FeatureStats,
}

/// Augment, split, featurize, train and evaluate.
pub fn run(ds: &Dataset, cfg: &PipelineConfig) -> Result<PipelineRun, PipelineError> {
    let augmented = augment_access(ds, &cfg.access, cfg.augment_seed);
    let (train_ds, test_ds) = split(&augmented, cfg.test_fraction, cfg.split_seed, cfg.stratified)?;
    let train = featurize(train_ds.records(), &cfg.rulebase, &cfg.access)?;
    let test = featurize(test_ds.records(), &cfg.rulebase, &cfg.access)?;
    let outcome = ensemble::train_with_history(&train.x, &train.y, &FEATURE_NAMES, &cfg.train)?;
    let metrics = ensemble::evaluate(&outcome.model, &test.x, &test.y)?;
    let feature_stats = outcome
        .model
        .feature_stats
        .clone()
        .expect("training set is non-empty");
    Ok(PipelineRun {
        model: outcome.model,
        metrics,
        loss_history: outcome.loss_history,
        train,
        test,
        feature_stats,
    })
}

/// Fuzzy scores and ordinal labels (0, 1, 2) of every labelled record.
pub fn fuzzy_scores_and_labels(ds: &Dataset, rb: &RuleBase) -> (Vec<f64>, Vec<f64>) {
    ds.records()
        .iter()
        .filter_map(|r| r.risk_label.map(|l| (rb.infer(r).score, l.index() as f64)))
        .unzip()
}
