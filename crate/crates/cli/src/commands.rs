//! Subcommand implementations that do more than call into the core library.

use std::path::Path;

use log::info;
use matrisk_core::data::{augment_access, split, Dataset};
use matrisk_core::ensemble::{evaluate, Metrics, TreeEnsemble};
use matrisk_core::pipeline::{self, featurize};
use matrisk_core::shap::global_importance;

use crate::config::{AppConfig, PipelineSettings};
use crate::engine::{training_record_path, Engine, TrainingRecord};
use crate::error::CliError;

pub fn load_dataset(cfg: &AppConfig) -> Result<Dataset, CliError> {
    cfg.data_source().load(&cfg.ranges).map_err(|e| CliError::Data(e.to_string()))
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    match path.parent().filter(|d| !d.as_os_str().is_empty()) {
        Some(dir) => std::fs::create_dir_all(dir).map_err(|e| CliError::Internal(format!("{}: {e}", dir.display()))),
        None => Ok(()),
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    ensure_parent(path)?;
    std::fs::write(path, text).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}

/// Trains on the configured data, writes the model and its training record
/// next to it, and returns both.
pub fn train(cfg: &AppConfig) -> Result<(TreeEnsemble, TrainingRecord), CliError> {
    let ds = load_dataset(cfg)?;
    let pc = cfg.pipeline_config()?;
    let run = pipeline::run(&ds, &pc).map_err(|e| CliError::Data(e.to_string()))?;
    let importance = global_importance(&run.model, &run.train.x).map_err(|e| CliError::Internal(e.to_string()))?;
    let source = cfg.data_source().describe();
    let m = &run.metrics;
    let record = TrainingRecord {
        model_version: run.model.digest(),
        data_source: source.clone(),
        records: ds.len(),
        pipeline: cfg.pipeline.clone(),
        train_config_digest: pc.train.digest(),
        rulebase: pc.rulebase.to_text(),
        access_table: pc.access.to_text(),
        metrics: m.clone(),
        importance,
        validation_note: format!(
            "Held-out accuracy {:.3} and macro one-vs-rest AUC {:.3} on a {}% {}split of {} ({} records).",
            m.accuracy,
            m.macro_auc,
            (cfg.pipeline.test_fraction * 100.0).round(),
            if cfg.pipeline.stratified { "stratified " } else { "" },
            source,
            ds.len()
        ),
    };
    ensure_parent(&cfg.paths.model)?;
    run.model
        .save(&cfg.paths.model)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let rec_path = training_record_path(&cfg.paths.model);
    write(&rec_path, &(serde_json::to_string_pretty(&record).expect("record serializes") + "\n"))?;
    info!(
        "wrote {} and {}",
        cfg.paths.model.display(),
        rec_path.display()
    );
    Ok((run.model, record))
}

/// Metrics of the loaded model on the held-out part of the configured data,
/// using the split recorded at training time when available, or on every
/// record when `all` is set.
pub fn evaluate_model(engine: &Engine, cfg: &AppConfig, all: bool) -> Result<Metrics, CliError> {
    let ds = load_dataset(cfg)?;
    let settings: PipelineSettings = engine
        .training
        .as_ref()
        .map_or_else(|| cfg.pipeline.clone(), |t| t.pipeline.clone());
    let augmented = augment_access(&ds, &engine.access, settings.augment_seed);
    let records = if all {
        augmented.records().to_vec()
    } else {
        let (_, test) = split(&augmented, settings.test_fraction, settings.split_seed, settings.stratified)
            .map_err(|e| CliError::Data(e.to_string()))?;
        test.records().to_vec()
    };
    let f = featurize(&records, &engine.rulebase, &engine.access).map_err(|e| CliError::Data(e.to_string()))?;
    evaluate(&engine.model, &f.x, &f.y).map_err(|e| CliError::Data(e.to_string()))
}

pub fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    write(path, &(serde_json::to_string_pretty(value).expect("value serializes") + "\n"))
}
