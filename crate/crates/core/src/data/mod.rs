//! Patient records, CSV ingestion and cleaning, synthetic access scores,
//! train/test splitting and model feature assembly.

mod access;
mod features;
mod load;
mod record;
mod split;
pub mod surrogate;

pub use access::{AccessTable, DEFAULT_ACCESS_TABLE};
pub use features::{
    to_features, FeatureStats, FeatureVector, ACCESS_SCORE_INDEX, FEATURE_NAMES,
    FUZZY_SCORE_INDEX, N_FEATURES,
};
pub use load::{load_csv, load_reader, plausible_medians, CleaningAction, Dataset, Provenance};
pub use record::{
    ClinicalField, Division, PatientRecord, PlausibilityRanges, RecordViolation, RiskLevel,
};
pub use split::{augment_access, split};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {row}, column {column}: cannot parse `{value}`")]
    UnparsableValue {
        row: usize,
        column: String,
        value: String,
    },
    #[error("{0} contains a header but no data rows")]
    EmptyFile(String),
    #[error("unknown division `{0}`")]
    UnknownDivision(String),
    #[error("invalid access table: {0}")]
    InvalidAccessTable(String),
    #[error("class {class} has {count} records, too few to stratify")]
    ClassTooSmall { class: RiskLevel, count: usize },
    #[error("{0}")]
    InvalidArgument(String),
}
