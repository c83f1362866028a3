//! Static checks on a rule base: term coverage, rule reachability and
//! declared monotonicity.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{LinguisticVariable, Monotone, RuleBase};

/// Sweep resolution as a fraction of each domain.
pub const SWEEP_DIVISIONS: usize = 200;
/// Points per monotone variable in the monotonicity sweep.
pub const MONOTONE_GRID: usize = 20;
const MONOTONE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageGap {
    pub variable: String,
    pub from: f64,
    pub to: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityViolation {
    pub variable: String,
    /// Values of the other inputs held fixed.
    pub context: BTreeMap<String, f64>,
    pub from: f64,
    pub to: f64,
    pub score_from: f64,
    pub score_to: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub coverage_gaps: Vec<CoverageGap>,
    pub unreachable_rules: Vec<u32>,
    pub unreachable_consequents: Vec<String>,
    pub monotonicity_violations: Vec<MonotonicityViolation>,
    /// Number of adjacent grid steps examined across all monotone variables.
    pub monotone_checks: usize,
}

impl Diagnostics {
    pub fn is_clean(&self) -> bool {
        self.coverage_gaps.is_empty()
            && self.unreachable_rules.is_empty()
            && self.unreachable_consequents.is_empty()
            && self.monotonicity_violations.is_empty()
    }
}

fn sweep(v: &LinguisticVariable, divisions: usize) -> Vec<f64> {
    let (lo, hi) = v.domain;
    (0..=divisions)
        .map(|i| if i == divisions { hi } else { lo + (hi - lo) * i as f64 / divisions as f64 })
        .collect()
}

fn coverage_gaps(v: &LinguisticVariable) -> Vec<CoverageGap> {
    let mut gaps = Vec::new();
    let mut open: Option<(f64, f64)> = None;
    for x in sweep(v, SWEEP_DIVISIONS) {
        let covered = v.degrees(x).iter().any(|d| *d > 0.0);
        open = match (open, covered) {
            (None, false) => Some((x, x)),
            (Some((a, _)), false) => Some((a, x)),
            (Some((a, b)), true) => {
                gaps.push(CoverageGap { variable: v.name.clone(), from: a, to: b });
                None
            }
            (None, true) => None,
        };
    }
    if let Some((a, b)) = open {
        gaps.push(CoverageGap { variable: v.name.clone(), from: a, to: b });
    }
    gaps
}

/// Grid points of `v` with one representative per distinct pattern of
/// (degree > 0, degree < 1) across terms. Rule positivity under
/// min/max/complement depends only on that pattern.
fn representatives(v: &LinguisticVariable) -> Vec<f64> {
    let mut seen: Vec<Vec<(bool, bool)>> = Vec::new();
    let mut reps = Vec::new();
    for x in sweep(v, SWEEP_DIVISIONS) {
        let sig: Vec<(bool, bool)> = v.degrees(x).iter().map(|d| (*d > 0.0, *d < 1.0)).collect();
        if !seen.contains(&sig) {
            seen.push(sig);
            reps.push(x);
        }
    }
    reps
}

fn unreachable_rules(rb: &RuleBase) -> Vec<u32> {
    let reps: BTreeMap<&str, Vec<f64>> = rb
        .inputs
        .iter()
        .map(|v| (v.name.as_str(), representatives(v)))
        .collect();
    let mut out = Vec::new();
    for rule in &rb.rules {
        let mut vars: Vec<&str> = rule.antecedent.atoms().into_iter().map(|(v, _)| v).collect();
        vars.sort_unstable();
        vars.dedup();
        let reachable = product(&vars, &reps).into_iter().any(|assign| {
            let fz = rb
                .fuzzify_with(|name| {
                    assign
                        .iter()
                        .find(|(n, _)| *n == name)
                        .map(|(_, x)| *x)
                        .or_else(|| rb.input(name).map(|v| v.domain.0))
                })
                .expect("all inputs resolvable");
            super::evaluate_rule(rule, &fz).unwrap_or(0.0) > 0.0
        });
        if !reachable {
            out.push(rule.id);
        }
    }
    out
}

fn product<'a>(vars: &[&'a str], reps: &BTreeMap<&str, Vec<f64>>) -> Vec<Vec<(&'a str, f64)>> {
    let mut acc: Vec<Vec<(&'a str, f64)>> = vec![Vec::new()];
    for v in vars {
        let mut next = Vec::new();
        for partial in &acc {
            for x in &reps[v] {
                let mut p = partial.clone();
                p.push((*v, *x));
                next.push(p);
            }
        }
        acc = next;
    }
    acc
}

/// Plateau midpoints of each term: one representative reading per
/// linguistic region.
fn context_points(v: &LinguisticVariable) -> Vec<f64> {
    let mut pts: Vec<f64> = v.terms.iter().map(|t| 0.5 * (t.mf.b + t.mf.c)).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn monotonicity(rb: &RuleBase, diag: &mut Diagnostics) {
    for (mi, mv) in rb.inputs.iter().enumerate() {
        let Some(direction) = mv.monotone else { continue };
        let (lo, hi) = mv.domain;
        let grid: Vec<f64> = (0..MONOTONE_GRID)
            .map(|i| lo + (hi - lo) * i as f64 / (MONOTONE_GRID - 1) as f64)
            .collect();
        let others: Vec<(usize, Vec<f64>)> = rb
            .inputs
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != mi)
            .map(|(i, v)| (i, context_points(v)))
            .collect();

        let mut contexts: Vec<Vec<f64>> = vec![Vec::new()];
        for (_, pts) in &others {
            contexts = contexts
                .iter()
                .flat_map(|c| {
                    pts.iter().map(move |p| {
                        let mut c = c.clone();
                        c.push(*p);
                        c
                    })
                })
                .collect();
        }

        for ctx in contexts {
            let mut values = vec![0.0; rb.inputs.len()];
            for ((vi, _), x) in others.iter().zip(&ctx) {
                values[*vi] = *x;
            }
            let mut prev: Option<(f64, f64)> = None;
            for &x in &grid {
                values[mi] = x;
                let score = score_of(rb, &values);
                if let Some((px, ps)) = prev {
                    diag.monotone_checks += 1;
                    let bad = match direction {
                        Monotone::Increasing => score < ps - MONOTONE_TOL,
                        Monotone::Decreasing => score > ps + MONOTONE_TOL,
                    };
                    if bad {
                        diag.monotonicity_violations.push(MonotonicityViolation {
                            variable: mv.name.clone(),
                            context: others
                                .iter()
                                .map(|(vi, _)| (rb.inputs[*vi].name.clone(), values[*vi]))
                                .collect(),
                            from: px,
                            to: x,
                            score_from: ps,
                            score_to: score,
                        });
                    }
                }
                prev = Some((x, score));
            }
        }
    }
}

fn score_of(rb: &RuleBase, values: &[f64]) -> f64 {
    let fz = rb
        .fuzzify_with(|name| {
            rb.inputs
                .iter()
                .position(|v| v.name == name)
                .map(|i| values[i])
        })
        .expect("all inputs resolvable");
    let acts = rb.activations(&fz).expect("validated");
    rb.defuzzify(&acts).unwrap_or(rb.fallback_score)
}

/// Runs every check and returns a report.
pub fn validate_rulebase(rb: &RuleBase) -> Diagnostics {
    let mut diag = Diagnostics::default();
    for v in rb.inputs.iter().chain(std::iter::once(&rb.output)) {
        diag.coverage_gaps.extend(coverage_gaps(v));
    }
    diag.unreachable_rules = unreachable_rules(rb);
    diag.unreachable_consequents = rb
        .output
        .terms
        .iter()
        .filter(|t| {
            !rb.rules
                .iter()
                .any(|r| r.consequent == t.name && !diag.unreachable_rules.contains(&r.id))
        })
        .map(|t| t.name.clone())
        .collect();
    monotonicity(rb, &mut diag);
    diag
}
