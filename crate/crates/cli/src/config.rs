//! Application configuration: an optional TOML file, then environment
//! overrides, then command-line flags.

use std::path::{Path, PathBuf};

use matrisk_core::data::{AccessTable, PlausibilityRanges};
use matrisk_core::ensemble::TrainConfig;
use matrisk_core::fuzzy::RuleBase;
use matrisk_core::lime::LimeConfig;
use matrisk_core::pipeline::{DataSource, PipelineConfig, UCI_CSV_ENV};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Overrides the model path.
pub const MODEL_ENV: &str = "MATRISK_MODEL";
/// Overrides the service bind address.
pub const BIND_ENV: &str = "MATRISK_BIND";
/// Overrides the log filter.
pub const LOG_ENV: &str = "MATRISK_LOG";

pub const DEFAULT_MODEL_PATH: &str = "model.json";
pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// UCI-format CSV. Unset means the file named by `MATRISK_UCI_CSV`, or
    /// the bundled surrogate.
    pub data: Option<PathBuf>,
    pub access_table: Option<PathBuf>,
    pub rulebase: Option<PathBuf>,
    pub model: PathBuf,
    pub survey: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            data: None,
            access_table: None,
            rulebase: None,
            model: PathBuf::from(DEFAULT_MODEL_PATH),
            survey: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSettings {
    pub augment_seed: u64,
    pub split_seed: u64,
    pub test_fraction: f64,
    pub stratified: bool,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        let p = PipelineConfig::default();
        Self {
            augment_seed: p.augment_seed,
            split_seed: p.split_seed,
            test_fraction: p.test_fraction,
            stratified: p.stratified,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceSettings {
    pub bind: String,
}

impl Default for ServiceSettings {
    fn default() -> Self {
        Self {
            bind: DEFAULT_BIND.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub paths: Paths,
    pub pipeline: PipelineSettings,
    pub train: TrainConfig,
    pub lime: LimeConfig,
    pub ranges: PlausibilityRanges,
    pub service: ServiceSettings,
    /// `env_logger` filter, e.g. `info` or `matrisk=debug`.
    pub log: String,
}

impl Default for AppConfig {
    fn default() -> Self {
        Self {
            paths: Paths::default(),
            pipeline: PipelineSettings::default(),
            train: TrainConfig::default(),
            lime: LimeConfig::default(),
            ranges: PlausibilityRanges::default(),
            service: ServiceSettings::default(),
            log: "info".to_string(),
        }
    }
}

impl AppConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: AppConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.train.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// Reads `path` if given, otherwise starts from the defaults, then applies
    /// environment overrides.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                Self::parse(&text)?
            }
            None => Self::default(),
        };
        cfg.apply_env(|k| std::env::var(k).ok());
        Ok(cfg)
    }

    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) {
        let set = |k| get(k).filter(|v| !v.is_empty());
        if let Some(v) = set(MODEL_ENV) {
            self.paths.model = PathBuf::from(v);
        }
        if let Some(v) = set(BIND_ENV) {
            self.service.bind = v;
        }
        if let Some(v) = set(LOG_ENV) {
            self.log = v;
        }
        if self.paths.data.is_none() {
            self.paths.data = set(UCI_CSV_ENV).map(PathBuf::from);
        }
    }

    pub fn data_source(&self) -> DataSource {
        match &self.paths.data {
            Some(p) => DataSource::Csv(p.clone()),
            None => DataSource::from_env(),
        }
    }

    pub fn rulebase(&self) -> Result<RuleBase, CliError> {
        match &self.paths.rulebase {
            Some(p) => RuleBase::from_file(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display()))),
            None => Ok(RuleBase::default()),
        }
    }

    pub fn access_table(&self) -> Result<AccessTable, CliError> {
        match &self.paths.access_table {
            Some(p) => AccessTable::from_file(p).map_err(|e| CliError::Config(e.to_string())),
            None => Ok(AccessTable::default()),
        }
    }

    pub fn pipeline_config(&self) -> Result<PipelineConfig, CliError> {
        Ok(PipelineConfig {
            augment_seed: self.pipeline.augment_seed,
            split_seed: self.pipeline.split_seed,
            test_fraction: self.pipeline.test_fraction,
            stratified: self.pipeline.stratified,
            train: self.train.clone(),
            rulebase: self.rulebase()?,
            access: self.access_table()?,
        })
    }
}
