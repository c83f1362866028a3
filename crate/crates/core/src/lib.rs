//! Hybrid explainable risk scoring for maternal health records.
//!
//! A fuzzy rule base turns six clinical measurements into an interpretable
//! 0-100 risk score. That score, the raw measurements and a regional
//! healthcare-access score feed a multiclass gradient-boosted tree ensemble.
//! Predictions are explained with exact path-dependent tree SHAP, LIME
//! surrogates and the fired fuzzy rules, composed into three explanation
//! formats. The `stats` module holds the validation statistics.

pub mod data;
pub mod ensemble;
pub mod explain;
pub mod fuzzy;
pub mod lime;
pub mod pipeline;
pub mod shap;
pub mod stats;
