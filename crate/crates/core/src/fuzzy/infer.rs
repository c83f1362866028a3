use serde::{Deserialize, Serialize};

use super::{FuzzyError, FuzzyRule, LinguisticVariable, RuleBase};
use crate::data::PatientRecord;

/// Term degrees of every input variable, in the rule base's variable and
/// term order.
#[derive(Debug, Clone, PartialEq)]
pub struct Fuzzified<'a> {
    vars: &'a [LinguisticVariable],
    degrees: Vec<Vec<f64>>,
}

impl<'a> Fuzzified<'a> {
    pub fn degree(&self, var: &str, term: &str) -> Option<f64> {
        let (vi, v) = self.vars.iter().enumerate().find(|(_, v)| v.name == var)?;
        let (ti, _) = v.term(term)?;
        Some(self.degrees[vi][ti])
    }

    pub fn variable(&self, var: &str) -> Option<Vec<(&str, f64)>> {
        let (vi, v) = self.vars.iter().enumerate().find(|(_, v)| v.name == var)?;
        Some(
            v.terms
                .iter()
                .map(|t| t.name.as_str())
                .zip(self.degrees[vi].iter().copied())
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiredRule {
    pub id: u32,
    pub activation: f64,
    pub consequent: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyAssessment {
    /// Crisp risk score in the output domain (0-100 for the default base).
    pub score: f64,
    /// Rules with nonzero activation, strongest first (ties by id).
    pub fired_rules: Vec<FiredRule>,
    /// Set when no rule fired and `score` is the fallback value.
    pub fallback: bool,
}

/// AND = min, OR = max, NOT = 1 - x, then scaled by the rule weight.
pub fn evaluate_rule(rule: &FuzzyRule, fuzzified: &Fuzzified<'_>) -> Result<f64, FuzzyError> {
    let raw = rule.antecedent.eval(&|v, t| fuzzified.degree(v, t))?;
    Ok((raw * rule.weight).clamp(0.0, 1.0))
}

impl RuleBase {
    /// Fuzzifies inputs supplied by `value`; variables the closure cannot
    /// resolve are an error.
    pub fn fuzzify_with<F>(&self, value: F) -> Result<Fuzzified<'_>, FuzzyError>
    where
        F: Fn(&str) -> Option<f64>,
    {
        let degrees = self
            .inputs
            .iter()
            .map(|v| {
                value(&v.name)
                    .map(|x| v.degrees(x))
                    .ok_or_else(|| FuzzyError::MissingInput(v.name.clone()))
            })
            .collect::<Result<_, _>>()?;
        Ok(Fuzzified {
            vars: &self.inputs,
            degrees,
        })
    }

    pub fn fuzzify_record(&self, r: &PatientRecord) -> Fuzzified<'_> {
        self.fuzzify_with(|name| r.value_by_name(name))
            .expect("rule-base inputs are validated patient fields")
    }

    /// Rule activations in rule order.
    pub fn activations(&self, fuzzified: &Fuzzified<'_>) -> Result<Vec<f64>, FuzzyError> {
        self.rules.iter().map(|r| evaluate_rule(r, fuzzified)).collect()
    }

    /// Mamdani inference over explicit rule activations at the configured grid step.
    pub fn defuzzify(&self, activations: &[f64]) -> Option<f64> {
        self.defuzzify_at(activations, self.grid_step)
    }

    /// Clips each consequent at its rule's activation, aggregates by max and
    /// returns the centroid over a uniform grid of `step`. `None` when the
    /// aggregated shape has zero area.
    pub fn defuzzify_at(&self, activations: &[f64], step: f64) -> Option<f64> {
        let (lo, hi) = self.output.domain;
        let consequents: Vec<_> = self
            .rules
            .iter()
            .map(|r| {
                self.output
                    .term(&r.consequent)
                    .map(|(_, t)| t.mf)
                    .expect("consequents validated")
            })
            .collect();
        let n = ((hi - lo) / step).round() as usize;
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..=n {
            let x = if i == n { hi } else { lo + i as f64 * step };
            let mut mu = 0.0f64;
            for (mf, act) in consequents.iter().zip(activations) {
                if *act > 0.0 {
                    mu = mu.max(mf.degree(x).min(*act));
                }
            }
            num += mu * x;
            den += mu;
        }
        (den > 0.0).then(|| (num / den).clamp(lo, hi))
    }

    /// Score and fired rules for one patient.
    pub fn infer(&self, r: &PatientRecord) -> FuzzyAssessment {
        self.infer_at(r, self.grid_step)
    }

    pub fn infer_at(&self, r: &PatientRecord, step: f64) -> FuzzyAssessment {
        let fz = self.fuzzify_record(r);
        let acts = self.activations(&fz).expect("rule atoms validated");
        self.assess(&acts, step)
    }

    pub(crate) fn assess(&self, acts: &[f64], step: f64) -> FuzzyAssessment {
        let mut fired: Vec<FiredRule> = self
            .rules
            .iter()
            .zip(acts)
            .filter(|(_, a)| **a > 0.0)
            .map(|(rule, a)| FiredRule {
                id: rule.id,
                activation: *a,
                consequent: rule.consequent.clone(),
                label: rule.label.clone(),
            })
            .collect();
        fired.sort_by(|a, b| b.activation.total_cmp(&a.activation).then(a.id.cmp(&b.id)));
        match self.defuzzify_at(acts, step) {
            Some(score) => FuzzyAssessment {
                score,
                fired_rules: fired,
                fallback: false,
            },
            None => FuzzyAssessment {
                score: self.fallback_score,
                fired_rules: fired,
                fallback: true,
            },
        }
    }
}

/// Free-function form of [`RuleBase::infer`].
pub fn infer(rb: &RuleBase, r: &PatientRecord) -> FuzzyAssessment {
    rb.infer(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::{parse_expr, Severity, Trapezoid};

    pub(crate) fn record(age: f64, sbp: f64, dbp: f64, bs: f64, temp: f64, hr: f64) -> PatientRecord {
        PatientRecord {
            age,
            systolic_bp: sbp,
            diastolic_bp: dbp,
            blood_sugar: bs,
            body_temp: temp,
            heart_rate: hr,
            division: None,
            risk_label: None,
        }
    }

    fn single_rule_base(consequent: Trapezoid) -> RuleBase {
        let age = LinguisticVariable::new("age", (10.0, 70.0), "years").with_term(
            "any",
            Trapezoid::new(10.0, 10.0, 70.0, 70.0).unwrap(),
            Severity::Normal,
        );
        let out = LinguisticVariable::new("risk", (0.0, 100.0), "score").with_term(
            "high",
            consequent,
            Severity::Critical,
        );
        let rule = FuzzyRule {
            id: 1,
            antecedent: parse_expr("age IS any").unwrap(),
            consequent: "high".into(),
            weight: 1.0,
            label: "always".into(),
        };
        RuleBase::new(vec![age], out, vec![rule], 0.5, 50.0).unwrap()
    }

    #[test]
    fn fully_fired_symmetric_term_gives_its_centre() {
        let rb = single_rule_base(Trapezoid::new(60.0, 75.0, 85.0, 100.0).unwrap());
        let a = rb.infer(&record(30.0, 120.0, 80.0, 5.0, 98.0, 70.0));
        assert!((a.score - 80.0).abs() < 1e-9, "{}", a.score);
        assert_eq!(a.fired_rules.len(), 1);
        assert!(!a.fallback);
    }

    #[test]
    fn no_rule_fired_falls_back_to_midpoint() {
        let age = LinguisticVariable::new("age", (10.0, 70.0), "years")
            .with_term("young", Trapezoid::new(10.0, 10.0, 20.0, 25.0).unwrap(), Severity::Normal)
            .with_term("old", Trapezoid::new(20.0, 30.0, 70.0, 70.0).unwrap(), Severity::Normal);
        let out = LinguisticVariable::new("risk", (0.0, 100.0), "score").with_term(
            "high",
            Trapezoid::new(60.0, 80.0, 100.0, 100.0).unwrap(),
            Severity::Critical,
        );
        let rule = FuzzyRule {
            id: 1,
            antecedent: parse_expr("age IS young").unwrap(),
            consequent: "high".into(),
            weight: 1.0,
            label: "young".into(),
        };
        let rb = RuleBase::new(vec![age], out, vec![rule], 0.5, 50.0).unwrap();
        let a = rb.infer(&record(50.0, 120.0, 80.0, 5.0, 98.0, 70.0));
        assert!(a.fallback);
        assert_eq!(a.score, 50.0);
        assert!(a.fired_rules.is_empty());
    }

    #[test]
    fn fuzzify_overlap_and_clamping() {
        let rb = RuleBase::default();
        let age = rb.input("age").unwrap();
        let d: Vec<_> = crate::fuzzy::fuzzify(age, 22.0);
        let get = |n: &str| d.iter().find(|(t, _)| t == n).unwrap().1;
        // young = (10,10,22.5,25) -> 1 at 22; optimal = (20,22.5,...) -> 0.8 at 22
        assert_eq!(get("young"), 1.0);
        assert!((get("optimal") - 0.8).abs() < 1e-12);
        assert_eq!(crate::fuzzy::fuzzify(age, 2.0), crate::fuzzy::fuzzify(age, 10.0));
        assert_eq!(get("advanced"), 0.0);
    }

    #[test]
    fn fired_rules_sorted_by_activation() {
        let rb = RuleBase::default();
        let a = rb.infer(&record(36.0, 135.0, 85.0, 8.0, 98.0, 80.0));
        assert!(a.fired_rules.windows(2).all(|w| w[0].activation >= w[1].activation));
        assert!(a.fired_rules.iter().all(|f| f.activation > 0.0 && f.activation <= 1.0));
    }

    #[test]
    fn benign_and_severe_profiles() {
        let rb = RuleBase::default();
        let benign = rb.infer(&record(25.0, 110.0, 70.0, 4.5, 98.0, 75.0));
        let severe = rb.infer(&record(48.0, 165.0, 110.0, 13.0, 98.0, 80.0));
        assert!(benign.score < 40.0, "{}", benign.score);
        assert!(severe.score > 60.0, "{}", severe.score);
    }
}
