//! Explanation bundles in three formats and their renderings.
//!
//! * Type A: fired fuzzy rules, SHAP contributions, optional LIME surrogate
//!   and a flagged clinical parameter table.
//! * Type B: SHAP contributions only.
//! * Type C: the prediction only.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{ClinicalField, PatientRecord, RiskLevel, FEATURE_NAMES};
use crate::fuzzy::{FuzzyAssessment, RuleBase, Severity};
use crate::lime::LimeExplanation;
use crate::shap::ShapValues;

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error("type {kind} explanation needs the {component} component")]
    MissingComponent {
        kind: ExplanationType,
        component: &'static str,
    },
    #[error("inconsistent components: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExplanationType {
    A,
    B,
    C,
}

impl ExplanationType {
    pub const ALL: [ExplanationType; 3] = [ExplanationType::A, ExplanationType::B, ExplanationType::C];

    pub fn description(self) -> &'static str {
        match self {
            ExplanationType::A => "hybrid: fuzzy rules, feature contributions and clinical parameters",
            ExplanationType::B => "feature contributions only",
            ExplanationType::C => "risk prediction only",
        }
    }
}

impl fmt::Display for ExplanationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExplanationType::A => "A",
            ExplanationType::B => "B",
            ExplanationType::C => "C",
        })
    }
}

impl FromStr for ExplanationType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" | "HYBRID" => Ok(ExplanationType::A),
            "B" | "SHAP" => Ok(ExplanationType::B),
            "C" | "SCORE" => Ok(ExplanationType::C),
            other => Err(format!("unknown explanation type `{other}` (expected A, B or C)")),
        }
    }
}

/// Rendering language. Only English is implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Locale {
    #[default]
    English,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub class: RiskLevel,
    pub probability: f64,
    /// Probabilities for Low, Mid, High.
    pub probabilities: [f64; 3],
}

impl Prediction {
    pub fn from_probabilities(p: &[f64]) -> Self {
        let probabilities = [p[0], p[1], p[2]];
        let class = crate::ensemble::argmax_high(p);
        Self {
            class: RiskLevel::from_index(class).expect("three classes"),
            probability: p[class],
            probabilities,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub version: String,
    pub validation_note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleLine {
    pub id: u32,
    pub activation: f64,
    pub consequent: String,
    pub label: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzySection {
    pub score: f64,
    pub fallback: bool,
    pub fired_count: usize,
    pub top_rules: Vec<RuleLine>,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub feature: String,
    pub value: f64,
    /// SHAP value (margin units) or LIME weight (per training SD).
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapSection {
    pub class: RiskLevel,
    pub base_value: f64,
    pub margin: f64,
    pub top_features: Vec<Contribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimeSection {
    pub class: Option<RiskLevel>,
    pub intercept: f64,
    pub local_fidelity: f64,
    pub top_features: Vec<Contribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterRow {
    pub field: String,
    pub value: f64,
    pub unit: String,
    pub term: String,
    pub flag: Severity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationBundle {
    #[serde(rename = "type")]
    pub kind: ExplanationType,
    pub prediction: Prediction,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fuzzy: Option<FuzzySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shap: Option<ShapSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lime: Option<LimeSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameters: Option<Vec<ParameterRow>>,
    pub model: ModelMeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComposeOptions {
    pub top_k_features: usize,
    pub top_rules: usize,
}

impl Default for ComposeOptions {
    fn default() -> Self {
        Self {
            top_k_features: 4,
            top_rules: 3,
        }
    }
}

/// Everything known about one instance. Type A needs `fuzzy` and `shap`;
/// Type B needs `shap`.
#[derive(Debug, Clone, Copy)]
pub struct Components<'a> {
    pub prediction: &'a Prediction,
    pub fuzzy: Option<&'a FuzzyAssessment>,
    pub shap: Option<&'a ShapValues>,
    pub lime: Option<&'a LimeExplanation>,
    pub record: &'a PatientRecord,
    pub rulebase: &'a RuleBase,
    pub model: &'a ModelMeta,
}

fn consequent_display(rb: &RuleBase, term: &str) -> String {
    rb.output
        .term(term)
        .map(|(_, t)| t.display.clone())
        .unwrap_or_else(|| term.to_string())
}

fn fuzzy_section(f: &FuzzyAssessment, rb: &RuleBase, top: usize) -> FuzzySection {
    let top_rules: Vec<RuleLine> = f
        .fired_rules
        .iter()
        .take(top)
        .map(|r| RuleLine {
            id: r.id,
            activation: r.activation,
            consequent: r.consequent.clone(),
            label: r.label.clone(),
            text: format!(
                "Rule {} fired at {:.2}: {} indicates {} risk",
                r.id,
                r.activation,
                r.label,
                consequent_display(rb, &r.consequent)
            ),
        })
        .collect();
    let summary = if f.fallback {
        format!(
            "No fuzzy rule fired for this patient, so the fuzzy score is the fallback value {:.1} (fallback flag set).",
            f.score
        )
    } else {
        format!(
            "Fuzzy risk score {:.1} of 100 from {} fired rule{}.",
            f.score,
            f.fired_rules.len(),
            if f.fired_rules.len() == 1 { "" } else { "s" }
        )
    };
    FuzzySection {
        score: f.score,
        fallback: f.fallback,
        fired_count: f.fired_rules.len(),
        top_rules,
        summary,
    }
}

fn feature_name(names: &[String], j: usize) -> String {
    names
        .get(j)
        .cloned()
        .unwrap_or_else(|| FEATURE_NAMES.get(j).map_or(format!("x{j}"), |s| s.to_string()))
}

/// Indices sorted by descending |value|, ties by index, truncated to `k`.
fn top_indices(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

fn shap_section(s: &ShapValues, class: RiskLevel, k: usize) -> ShapSection {
    let c = class.index();
    ShapSection {
        class,
        base_value: s.base_values[c],
        margin: s.reconstructed_margin(c),
        top_features: top_indices(&s.phi[c], k)
            .into_iter()
            .map(|j| Contribution {
                feature: feature_name(&s.feature_names, j),
                value: s.instance[j],
                contribution: s.phi[c][j],
            })
            .collect(),
    }
}

fn lime_section(l: &LimeExplanation, instance: &[f64], names: &[String], k: usize) -> LimeSection {
    LimeSection {
        class: l.class.and_then(RiskLevel::from_index),
        intercept: l.intercept,
        local_fidelity: l.local_fidelity,
        top_features: l
            .top_k
            .iter()
            .copied()
            .take(k)
            .map(|j| Contribution {
                feature: feature_name(names, j),
                value: instance.get(j).copied().unwrap_or(f64::NAN),
                contribution: l.weights[j],
            })
            .collect(),
    }
}

fn parameter_rows(r: &PatientRecord, rb: &RuleBase) -> Vec<ParameterRow> {
    ClinicalField::ALL
        .iter()
        .map(|&field| {
            let value = r.get(field);
            let (term, flag) = rb
                .input(field.name())
                .and_then(|v| v.dominant_term(value))
                .map_or(("unclassified".to_string(), Severity::Normal), |t| {
                    (t.display.clone(), t.severity)
                });
            ParameterRow {
                field: field.name().to_string(),
                value,
                unit: field.unit().to_string(),
                term,
                flag,
            }
        })
        .collect()
}

/// Builds a bundle whose sections match `kind` exactly.
pub fn compose(
    kind: ExplanationType,
    c: &Components<'_>,
    opts: &ComposeOptions,
) -> Result<ExplanationBundle, ExplainError> {
    let missing = |component| ExplainError::MissingComponent { kind, component };
    let mut b = ExplanationBundle {
        kind,
        prediction: c.prediction.clone(),
        fuzzy: None,
        shap: None,
        lime: None,
        parameters: None,
        model: c.model.clone(),
    };
    match kind {
        ExplanationType::C => {}
        ExplanationType::B => {
            let s = c.shap.ok_or_else(|| missing("shap"))?;
            check_shap(s)?;
            b.shap = Some(shap_section(s, c.prediction.class, opts.top_k_features));
        }
        ExplanationType::A => {
            let f = c.fuzzy.ok_or_else(|| missing("fuzzy"))?;
            let s = c.shap.ok_or_else(|| missing("shap"))?;
            check_shap(s)?;
            b.fuzzy = Some(fuzzy_section(f, c.rulebase, opts.top_rules));
            b.shap = Some(shap_section(s, c.prediction.class, opts.top_k_features));
            b.lime = c
                .lime
                .map(|l| lime_section(l, &s.instance, &s.feature_names, opts.top_k_features));
            b.parameters = Some(parameter_rows(c.record, c.rulebase));
        }
    }
    Ok(b)
}

fn check_shap(s: &ShapValues) -> Result<(), ExplainError> {
    if s.phi.len() != 3 || s.base_values.len() != 3 {
        return Err(ExplainError::Inconsistent("SHAP values must cover three classes".into()));
    }
    if s.phi.iter().any(|p| p.len() != s.instance.len()) {
        return Err(ExplainError::Inconsistent("SHAP rows differ from instance length".into()));
    }
    Ok(())
}

fn signed(v: f64, decimals: usize) -> String {
    // Avoid printing "-0.000".
    let s = format!("{v:+.decimals$}");
    if s.trim_start_matches(['+', '-']).chars().all(|c| c == '0' || c == '.') {
        format!("{:+.decimals$}", 0.0)
    } else {
        s
    }
}

/// Plain-text rendering in English.
pub fn render_text(b: &ExplanationBundle) -> String {
    render_text_in(b, Locale::English)
}

pub fn render_text_in(b: &ExplanationBundle, locale: Locale) -> String {
    match locale {
        Locale::English => render_english(b),
    }
}

fn render_english(b: &ExplanationBundle) -> String {
    let mut s = String::new();
    let p = &b.prediction;
    let _ = writeln!(
        s,
        "Predicted risk: {} (probability {:.3}; Low {:.3}, Mid {:.3}, High {:.3})",
        p.class, p.probability, p.probabilities[0], p.probabilities[1], p.probabilities[2]
    );
    let _ = writeln!(s, "Explanation type {}: {}", b.kind, b.kind.description());

    if let Some(f) = &b.fuzzy {
        let _ = writeln!(s, "\nFuzzy rules");
        let _ = writeln!(s, "  {}", f.summary);
        for r in &f.top_rules {
            let _ = writeln!(s, "  {}", r.text);
        }
    }
    if let Some(sh) = &b.shap {
        let _ = writeln!(
            s,
            "\nFeature contributions to the {} margin (base {:.3}, total {:.3})",
            sh.class, sh.base_value, sh.margin
        );
        let w = sh.top_features.iter().map(|c| c.feature.len()).max().unwrap_or(0);
        for c in &sh.top_features {
            let _ = writeln!(
                s,
                "  {:w$} = {:<8} {}",
                c.feature,
                format!("{:.1}", c.value),
                signed(c.contribution, 3)
            );
        }
    }
    if let Some(l) = &b.lime {
        let _ = writeln!(
            s,
            "\nLocal linear surrogate (fidelity {:.2}, intercept {:.3})",
            l.local_fidelity, l.intercept
        );
        let w = l.top_features.iter().map(|c| c.feature.len()).max().unwrap_or(0);
        for c in &l.top_features {
            let _ = writeln!(s, "  {:w$} {} per SD", c.feature, signed(c.contribution, 3));
        }
    }
    if let Some(rows) = &b.parameters {
        let _ = writeln!(s, "\nClinical parameters");
        let w = rows.iter().map(|r| r.field.len()).max().unwrap_or(0);
        for r in rows {
            let _ = writeln!(
                s,
                "  {:w$}  {:>6} {:<6}  {:<10} {}",
                r.field,
                format!("{:.1}", r.value),
                r.unit,
                format!("[{}]", r.flag),
                r.term
            );
        }
    }
    let _ = writeln!(s, "\nModel {}. {}", b.model.version, b.model.validation_note);
    s
}

/// JSON wire form of a bundle, as served by the HTTP API.
pub fn render_structured(b: &ExplanationBundle) -> serde_json::Value {
    serde_json::to_value(b).expect("bundle serializes")
}
