//! Rule-base model and its text configuration format.
//!
//! ```text
//! [settings]
//! grid_step = 0.5
//! fallback_score = 50
//!
//! [input systolic_bp]
//! unit = mmHg
//! domain = 70 200
//! monotone = increasing
//! term normal = 70 70 117.5 122.5 | normal | normal
//! term stage2 = 137.5 142.5 200 200 | critical | Stage-2 hypertension
//!
//! [output risk]
//! domain = 0 100
//! term high = 60 80 100 100
//!
//! [rule 1]
//! if = systolic_bp IS stage2 OR diastolic_bp IS stage2
//! then = high
//! weight = 1.0
//! label = Stage-2 blood pressure
//! ```
//!
//! A term line is `term <name> = a b c d`, optionally followed by
//! `| <severity>` and `| <display name>`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{parse_expr, Expr, FuzzyError, LinguisticVariable, Severity, Term, Trapezoid};
use crate::data::ClinicalField;

pub const DEFAULT_RULEBASE: &str = include_str!("../../../../config/rulebase.txt");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyRule {
    pub id: u32,
    pub antecedent: Expr,
    /// Term of the output variable.
    pub consequent: String,
    pub weight: f64,
    /// Short clinical description used in rendered explanations.
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleBase {
    pub inputs: Vec<LinguisticVariable>,
    pub output: LinguisticVariable,
    pub rules: Vec<FuzzyRule>,
    pub grid_step: f64,
    pub fallback_score: f64,
}

impl RuleBase {
    /// Checks every cross-reference and value constraint.
    pub fn new(
        inputs: Vec<LinguisticVariable>,
        output: LinguisticVariable,
        rules: Vec<FuzzyRule>,
        grid_step: f64,
        fallback_score: f64,
    ) -> Result<Self, FuzzyError> {
        let rb = Self {
            inputs,
            output,
            rules,
            grid_step,
            fallback_score,
        };
        rb.check()?;
        Ok(rb)
    }

    fn check(&self) -> Result<(), FuzzyError> {
        for v in &self.inputs {
            v.check()?;
            if v.name.parse::<ClinicalField>().is_err() {
                return Err(FuzzyError::Config(format!(
                    "input `{}` is not a patient field (expected one of: {})",
                    v.name,
                    ClinicalField::ALL.map(|f| f.name()).join(", ")
                )));
            }
        }
        for (i, v) in self.inputs.iter().enumerate() {
            if self.inputs[..i].iter().any(|o| o.name == v.name) {
                return Err(FuzzyError::Config(format!("input `{}` declared twice", v.name)));
            }
        }
        self.output.check()?;
        if !(self.grid_step > 0.0 && self.grid_step.is_finite()) {
            return Err(FuzzyError::Config(format!("grid_step must be positive, got {}", self.grid_step)));
        }
        let (lo, hi) = self.output.domain;
        if !(lo..=hi).contains(&self.fallback_score) {
            return Err(FuzzyError::Config(format!(
                "fallback_score {} outside output domain",
                self.fallback_score
            )));
        }
        if self.rules.is_empty() {
            return Err(FuzzyError::Config("rule base has no rules".into()));
        }
        for (i, r) in self.rules.iter().enumerate() {
            if self.rules[..i].iter().any(|o| o.id == r.id) {
                return Err(FuzzyError::Config(format!("rule {} declared twice", r.id)));
            }
            if !(r.weight > 0.0 && r.weight <= 1.0) {
                return Err(FuzzyError::Config(format!(
                    "rule {}: weight {} outside (0, 1]",
                    r.id, r.weight
                )));
            }
            if self.output.term(&r.consequent).is_none() {
                return Err(FuzzyError::UnknownAtom {
                    var: self.output.name.clone(),
                    term: r.consequent.clone(),
                });
            }
            for (var, term) in r.antecedent.atoms() {
                let known = self.input(var).and_then(|v| v.term(term)).is_some();
                if !known {
                    return Err(FuzzyError::UnknownAtom {
                        var: var.to_string(),
                        term: term.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn input(&self, name: &str) -> Option<&LinguisticVariable> {
        self.inputs.iter().find(|v| v.name == name)
    }

    pub fn rule(&self, id: u32) -> Option<&FuzzyRule> {
        self.rules.iter().find(|r| r.id == id)
    }

    pub fn parse(text: &str) -> Result<Self, FuzzyError> {
        parse_config(text)
    }

    pub fn from_file(path: &Path) -> Result<Self, FuzzyError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| FuzzyError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Serializes to the config format; `parse(to_text())` reproduces `self`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[settings]");
        let _ = writeln!(out, "grid_step = {}", self.grid_step);
        let _ = writeln!(out, "fallback_score = {}", self.fallback_score);
        for v in &self.inputs {
            let _ = writeln!(out, "\n[input {}]", v.name);
            write_variable(&mut out, v);
        }
        let _ = writeln!(out, "\n[output {}]", self.output.name);
        write_variable(&mut out, &self.output);
        for r in &self.rules {
            let _ = writeln!(out, "\n[rule {}]", r.id);
            let _ = writeln!(out, "if = {}", r.antecedent);
            let _ = writeln!(out, "then = {}", r.consequent);
            let _ = writeln!(out, "weight = {}", r.weight);
            let _ = writeln!(out, "label = {}", r.label);
        }
        out
    }
}

impl Default for RuleBase {
    fn default() -> Self {
        Self::parse(DEFAULT_RULEBASE).expect("bundled rule base is valid")
    }
}

fn write_variable(out: &mut String, v: &LinguisticVariable) {
    let _ = writeln!(out, "unit = {}", v.unit);
    let _ = writeln!(out, "domain = {} {}", v.domain.0, v.domain.1);
    if let Some(m) = v.monotone {
        let _ = writeln!(
            out,
            "monotone = {}",
            match m {
                super::Monotone::Increasing => "increasing",
                super::Monotone::Decreasing => "decreasing",
            }
        );
    }
    for t in &v.terms {
        let [a, b, c, d] = t.mf.breakpoints();
        let _ = writeln!(
            out,
            "term {} = {a} {b} {c} {d} | {} | {}",
            t.name, t.severity, t.display
        );
    }
}

enum Section {
    None,
    Settings,
    Variable { output: bool, var: LinguisticVariable },
    Rule(PartialRule),
}

#[derive(Default)]
struct PartialRule {
    id: u32,
    antecedent: Option<Expr>,
    consequent: Option<String>,
    weight: Option<f64>,
    label: Option<String>,
}

struct Collected {
    inputs: Vec<LinguisticVariable>,
    output: Option<LinguisticVariable>,
    rules: Vec<FuzzyRule>,
    grid_step: f64,
    fallback_score: f64,
}

fn parse_config(text: &str) -> Result<RuleBase, FuzzyError> {
    let mut acc = Collected {
        inputs: Vec::new(),
        output: None,
        rules: Vec::new(),
        grid_step: 0.5,
        fallback_score: 50.0,
    };
    let mut section = Section::None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |msg: String| FuzzyError::Config(format!("line {lineno}: {msg}"));

        if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            finish(std::mem::replace(&mut section, Section::None), &mut acc, lineno)?;
            let mut parts = header.split_whitespace();
            section = match (parts.next(), parts.next(), parts.next()) {
                (Some("settings"), None, None) => Section::Settings,
                (Some(kind @ ("input" | "output")), Some(name), None) => Section::Variable {
                    output: kind == "output",
                    var: LinguisticVariable::new(name, (f64::NAN, f64::NAN), ""),
                },
                (Some("rule"), Some(id), None) => Section::Rule(PartialRule {
                    id: id.parse().map_err(|_| at(format!("rule id `{id}` is not an integer")))?,
                    ..Default::default()
                }),
                _ => return Err(at(format!("unknown section `[{header}]`"))),
            };
            continue;
        }

        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| at(format!("expected `key = value`, got `{line}`")))?;
        let num = |s: &str| -> Result<f64, FuzzyError> {
            s.parse::<f64>().map_err(|_| at(format!("`{s}` is not a number")))
        };

        match &mut section {
            Section::None => return Err(at("key outside of any section".into())),
            Section::Settings => match key {
                "grid_step" => acc.grid_step = num(value)?,
                "fallback_score" => acc.fallback_score = num(value)?,
                _ => return Err(at(format!("unknown setting `{key}`"))),
            },
            Section::Variable { var, .. } => {
                if let Some(term_name) = key.strip_prefix("term ") {
                    var.terms.push(parse_term(term_name.trim(), value).map_err(|e| at(e.to_string()))?);
                    continue;
                }
                match key {
                    "unit" => var.unit = value.to_string(),
                    "domain" => {
                        let v: Vec<&str> = value.split_whitespace().collect();
                        if v.len() != 2 {
                            return Err(at("domain needs two numbers".into()));
                        }
                        var.domain = (num(v[0])?, num(v[1])?);
                    }
                    "monotone" => {
                        var.monotone = match value {
                            "increasing" => Some(super::Monotone::Increasing),
                            "decreasing" => Some(super::Monotone::Decreasing),
                            "none" => None,
                            other => return Err(at(format!("unknown monotone direction `{other}`"))),
                        }
                    }
                    _ => return Err(at(format!("unknown variable key `{key}`"))),
                }
            }
            Section::Rule(rule) => match key {
                "if" => rule.antecedent = Some(parse_expr(value).map_err(|e| at(e.to_string()))?),
                "then" => rule.consequent = Some(value.to_string()),
                "weight" => rule.weight = Some(num(value)?),
                "label" => rule.label = Some(value.to_string()),
                _ => return Err(at(format!("unknown rule key `{key}`"))),
            },
        }
    }
    finish(section, &mut acc, text.lines().count())?;

    let output = acc
        .output
        .ok_or_else(|| FuzzyError::Config("no [output ...] section".into()))?;
    RuleBase::new(acc.inputs, output, acc.rules, acc.grid_step, acc.fallback_score)
}

fn finish(section: Section, acc: &mut Collected, lineno: usize) -> Result<(), FuzzyError> {
    match section {
        Section::None | Section::Settings => {}
        Section::Variable { output, var } => {
            if var.domain.0.is_nan() {
                return Err(FuzzyError::Config(format!("variable {} has no domain", var.name)));
            }
            if output {
                if acc.output.is_some() {
                    return Err(FuzzyError::Config("more than one [output] section".into()));
                }
                acc.output = Some(var);
            } else {
                acc.inputs.push(var);
            }
        }
        Section::Rule(r) => {
            let missing = |what: &str| {
                FuzzyError::Config(format!("rule {} (before line {lineno}) has no `{what}`", r.id))
            };
            let antecedent = r.antecedent.ok_or_else(|| missing("if"))?;
            let consequent = r.consequent.ok_or_else(|| missing("then"))?;
            acc.rules.push(FuzzyRule {
                id: r.id,
                label: r.label.unwrap_or_else(|| antecedent.to_string()),
                antecedent,
                consequent,
                weight: r.weight.unwrap_or(1.0),
            });
        }
    }
    Ok(())
}

fn parse_term(name: &str, value: &str) -> Result<Term, FuzzyError> {
    let mut parts = value.split('|').map(str::trim);
    let nums: Vec<f64> = parts
        .next()
        .unwrap_or("")
        .split_whitespace()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| FuzzyError::Config(format!("term {name}: `{s}` is not a number")))
        })
        .collect::<Result<_, _>>()?;
    let mf = match nums.as_slice() {
        [a, b, c, d] => Trapezoid::new(*a, *b, *c, *d)?,
        [a, b, c] => Trapezoid::triangle(*a, *b, *c)?,
        _ => {
            return Err(FuzzyError::Config(format!(
                "term {name}: expected 3 (triangle) or 4 (trapezoid) breakpoints"
            )))
        }
    };
    let severity = match parts.next() {
        Some(s) if !s.is_empty() => s.parse::<Severity>()?,
        _ => Severity::Normal,
    };
    let display = match parts.next() {
        Some(s) if !s.is_empty() => s.to_string(),
        _ => name.replace('_', " "),
    };
    Ok(Term {
        name: name.to_string(),
        mf,
        severity,
        display,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_rule_base_has_twelve_rules() {
        let rb = RuleBase::default();
        assert_eq!(rb.rules.len(), 12);
        assert_eq!(rb.inputs.len(), 6);
        assert_eq!(rb.output.name, "risk");
        assert_eq!(rb.output.domain, (0.0, 100.0));
        assert_eq!(rb.grid_step, 0.5);
    }

    #[test]
    fn age_terms_follow_interval_labels() {
        let rb = RuleBase::default();
        let age = rb.input("age").unwrap();
        let names: Vec<_> = age.terms.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(names, ["young", "optimal", "advanced", "high_risk"]);
        // Young (15-25): plateau on the central half, shoulder to the domain edge.
        assert_eq!(age.term("young").unwrap().1.mf.breakpoints(), [10.0, 10.0, 22.5, 25.0]);
        assert_eq!(age.term("optimal").unwrap().1.mf.breakpoints()[1..3], [22.5, 27.5]);
    }

    #[test]
    fn text_round_trip() {
        let rb = RuleBase::default();
        let again = RuleBase::parse(&rb.to_text()).unwrap();
        assert_eq!(again, rb);
    }

    #[test]
    fn unknown_term_in_rule() {
        let text = DEFAULT_RULEBASE.replacen("IS diabetic", "IS gestational", 1);
        assert!(matches!(
            RuleBase::parse(&text),
            Err(FuzzyError::UnknownAtom { term, .. }) if term == "gestational"
        ));
    }

    #[test]
    fn unknown_input_variable() {
        let text = DEFAULT_RULEBASE.replace("[input heart_rate]", "[input parity]");
        assert!(RuleBase::parse(&text).is_err());
    }

    #[test]
    fn bad_weight_rejected() {
        let text = DEFAULT_RULEBASE.replacen("weight = 1.0", "weight = 1.5", 1);
        assert!(RuleBase::parse(&text).is_err());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = RuleBase::parse("[settings]\ngrid_step = fast\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }
}
