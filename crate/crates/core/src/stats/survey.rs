use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    anova_from_summary, chi_square_independence, chi_square_power, cohens_w, ContingencyTable,
    Df, EffectSize, GroupSummary, StatsError, TestResult,
};

/// The bundled reconstructed survey tables.
pub const DEFAULT_SURVEY_COUNTS: &str = include_str!("../../../../data/survey_counts.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceTable {
    pub cases: Vec<String>,
    pub types: Vec<String>,
    /// One row per case, one column per explanation type.
    pub counts: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustTable {
    pub levels: Vec<String>,
    pub by_case: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaritySummary {
    pub case: String,
    pub mean: f64,
    pub sd: f64,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemographicGroup {
    pub group: String,
    pub labels: Vec<String>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiSelect {
    pub labels: Vec<String>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyCounts {
    pub status: String,
    pub respondents: u64,
    #[serde(default)]
    pub reconstructed_fields: Vec<String>,
    pub reported_chi_square: Option<f64>,
    pub reported_cohens_w: Option<f64>,
    pub reported_power: Option<f64>,
    pub preferences: PreferenceTable,
    pub trust: TrustTable,
    pub clarity: Vec<ClaritySummary>,
    #[serde(default)]
    pub demographics: Vec<DemographicGroup>,
    pub barriers: Option<MultiSelect>,
}

impl SurveyCounts {
    pub fn parse(text: &str) -> Result<Self, StatsError> {
        toml::from_str(text).map_err(|e| StatsError::Parse(e.to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, StatsError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| StatsError::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn preference_table(&self) -> Result<ContingencyTable, StatsError> {
        ContingencyTable::new(
            self.preferences.cases.clone(),
            self.preferences.types.clone(),
            self.preferences.counts.clone(),
        )
    }
}

impl Default for SurveyCounts {
    fn default() -> Self {
        Self::parse(DEFAULT_SURVEY_COUNTS).expect("bundled survey counts parse")
    }
}

/// A count out of a total, with the percentage rounded half-up to one
/// decimal using integer arithmetic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub label: String,
    pub count: u64,
    pub total: u64,
    pub percent: f64,
    pub display: String,
}

impl Proportion {
    pub fn new(label: impl Into<String>, count: u64, total: u64) -> Self {
        let tenths = (2 * count * 1000 + total) / (2 * total);
        Self {
            label: label.into(),
            count,
            total,
            percent: 100.0 * count as f64 / total as f64,
            display: format!("{}.{}", tenths / 10, tenths % 10),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyAggregates {
    pub respondents: u64,
    pub responses: u64,
    /// Per explanation type, over all case responses.
    pub preference: Vec<Proportion>,
    /// Per case, per type, over respondents.
    pub preference_by_case: Vec<(String, Vec<Proportion>)>,
    pub trust: Vec<Proportion>,
    pub trust_by_case: Vec<(String, Vec<Proportion>)>,
    pub demographics: Vec<(String, Vec<Proportion>)>,
    pub barriers: Vec<Proportion>,
}

fn check_row(what: &str, row: &[u64], width: usize, total: u64) -> Result<(), StatsError> {
    if row.len() != width {
        return Err(StatsError::InconsistentTotals(format!(
            "{what} has {} entries, expected {width}",
            row.len()
        )));
    }
    let s: u64 = row.iter().sum();
    if s != total {
        return Err(StatsError::InconsistentTotals(format!("{what} sums to {s}, expected {total}")));
    }
    Ok(())
}

fn proportions(labels: &[String], counts: &[u64], total: u64) -> Vec<Proportion> {
    labels
        .iter()
        .zip(counts)
        .map(|(l, c)| Proportion::new(l.clone(), *c, total))
        .collect()
}

fn column_sums(rows: &[Vec<u64>], width: usize) -> Vec<u64> {
    (0..width).map(|j| rows.iter().map(|r| r[j]).sum()).collect()
}

/// Proportions for every table, after checking that each case row sums to
/// the number of respondents.
pub fn aggregate_survey(c: &SurveyCounts) -> Result<SurveyAggregates, StatsError> {
    let n = c.respondents;
    if n == 0 {
        return Err(StatsError::InconsistentTotals("no respondents".into()));
    }
    let p = &c.preferences;
    if p.counts.len() != p.cases.len() {
        return Err(StatsError::InconsistentTotals("preference rows differ from cases".into()));
    }
    for (case, row) in p.cases.iter().zip(&p.counts) {
        check_row(&format!("preferences for {case}"), row, p.types.len(), n)?;
    }
    if c.trust.by_case.len() != p.cases.len() {
        return Err(StatsError::InconsistentTotals("trust rows differ from cases".into()));
    }
    for (case, row) in p.cases.iter().zip(&c.trust.by_case) {
        check_row(&format!("trust for {case}"), row, c.trust.levels.len(), n)?;
    }
    for d in &c.demographics {
        check_row(&d.group, &d.counts, d.labels.len(), n)?;
    }
    let responses = n * p.cases.len() as u64;

    let barriers = match &c.barriers {
        Some(b) => {
            if b.labels.len() != b.counts.len() || b.counts.iter().any(|v| *v > n) {
                return Err(StatsError::InconsistentTotals("barrier counts".into()));
            }
            proportions(&b.labels, &b.counts, n)
        }
        None => Vec::new(),
    };

    Ok(SurveyAggregates {
        respondents: n,
        responses,
        preference: proportions(&p.types, &column_sums(&p.counts, p.types.len()), responses),
        preference_by_case: p
            .cases
            .iter()
            .zip(&p.counts)
            .map(|(case, row)| (case.clone(), proportions(&p.types, row, n)))
            .collect(),
        trust: proportions(
            &c.trust.levels,
            &column_sums(&c.trust.by_case, c.trust.levels.len()),
            responses,
        ),
        trust_by_case: p
            .cases
            .iter()
            .zip(&c.trust.by_case)
            .map(|(case, row)| (case.clone(), proportions(&c.trust.levels, row, n)))
            .collect(),
        demographics: c
            .demographics
            .iter()
            .map(|d| (d.group.clone(), proportions(&d.labels, &d.counts, n)))
            .collect(),
        barriers,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCase {
    pub w: f64,
    pub n: u64,
    pub df: u32,
    pub alpha: f64,
    pub power: f64,
    pub reported: Option<f64>,
}

/// Everything the `stats` command prints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyReport {
    pub status: String,
    pub aggregates: SurveyAggregates,
    pub preference_chi_square: TestResult,
    pub reported_chi_square: Option<f64>,
    /// w from the computed statistic over all case responses.
    pub cohens_w: EffectSize,
    /// w from the reported statistic over all case responses.
    pub cohens_w_from_reported: Option<EffectSize>,
    pub reported_cohens_w: Option<f64>,
    pub clarity_anova: TestResult,
    pub power: PowerCase,
}

/// Aggregates plus the chi-square, effect-size, ANOVA and power analyses.
pub fn survey_report(c: &SurveyCounts) -> Result<SurveyReport, StatsError> {
    let aggregates = aggregate_survey(c)?;
    let chi = chi_square_independence(&c.preference_table()?)?;
    let n = aggregates.responses;
    let groups: Vec<GroupSummary> = c
        .clarity
        .iter()
        .map(|s| GroupSummary::new(s.mean, s.sd, s.n))
        .collect();
    let w_power = c.reported_cohens_w.unwrap_or(cohens_w(chi.statistic, n)?.cohens_w);
    let power_df = (c.preferences.types.len() - 1) as u32;
    let power = PowerCase {
        w: w_power,
        n: c.respondents,
        df: power_df,
        alpha: 0.05,
        power: chi_square_power(EffectSize { cohens_w: w_power }, c.respondents, power_df, 0.05)?,
        reported: c.reported_power,
    };
    Ok(SurveyReport {
        status: c.status.clone(),
        cohens_w: cohens_w(chi.statistic, n)?,
        cohens_w_from_reported: c.reported_chi_square.map(|x| cohens_w(x, n)).transpose()?,
        reported_cohens_w: c.reported_cohens_w,
        preference_chi_square: chi,
        reported_chi_square: c.reported_chi_square,
        clarity_anova: anova_from_summary(&groups)?,
        power,
        aggregates,
    })
}

fn df_text(df: Df) -> String {
    match df {
        Df::One(d) => format!("{d}"),
        Df::Pair(a, b) => format!("{a}, {b}"),
    }
}

fn write_props(out: &mut String, props: &[Proportion]) {
    let width = props.iter().map(|p| p.label.len()).max().unwrap_or(0);
    for p in props {
        let _ = writeln!(
            out,
            "  {:width$}  {:>3}/{:<3} {:>5}%",
            p.label, p.count, p.total, p.display
        );
    }
}

impl SurveyReport {
    pub fn render_text(&self) -> String {
        let a = &self.aggregates;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "Clinician survey ({} counts): {} respondents, {} case responses\n",
            self.status, a.respondents, a.responses
        );
        s.push_str("Preferred explanation, all cases\n");
        write_props(&mut s, &a.preference);
        for (case, props) in &a.preference_by_case {
            let _ = writeln!(s, "Preferred explanation, {case}");
            write_props(&mut s, props);
        }
        s.push_str("\nTrust, all cases\n");
        write_props(&mut s, &a.trust);
        for (case, props) in &a.trust_by_case {
            let _ = writeln!(s, "Trust, {case}");
            write_props(&mut s, props);
        }
        for (group, props) in &a.demographics {
            let _ = writeln!(s, "\n{group}");
            write_props(&mut s, props);
        }
        if !a.barriers.is_empty() {
            s.push_str("\nBarriers to adoption (multi-select)\n");
            write_props(&mut s, &a.barriers);
        }

        let c = &self.preference_chi_square;
        let _ = writeln!(
            s,
            "\nChi-square independence, case x preferred type: chi2 = {:.3}, df = {}, p = {:.4}",
            c.statistic,
            df_text(c.df),
            c.p_value
        );
        if let Some(r) = self.reported_chi_square {
            let _ = writeln!(
                s,
                "  reported chi2 = {r} is not derivable from the published counts"
            );
        }
        let _ = writeln!(
            s,
            "Cohen's w: {:.3} from computed chi2 over {} responses",
            self.cohens_w.cohens_w, a.responses
        );
        if let Some(w) = self.cohens_w_from_reported {
            let _ = writeln!(s, "  {:.3} from reported chi2 over {} responses", w.cohens_w, a.responses);
        }
        if let Some(w) = self.reported_cohens_w {
            let _ = writeln!(s, "  reported w = {w}");
        }
        let f = &self.clarity_anova;
        let _ = writeln!(
            s,
            "One-way ANOVA, clarity by case: F({}) = {:.3}, p = {:.3}",
            df_text(f.df),
            f.statistic,
            f.p_value
        );
        let p = &self.power;
        let _ = write!(
            s,
            "Chi-square power: w = {}, n = {}, df = {}, alpha = {} -> power = {:.3}",
            p.w, p.n, p.df, p.alpha, p.power
        );
        match p.reported {
            Some(r) => {
                let _ = writeln!(s, " (reported {:.0}%, difference {:+.3})", r * 100.0, p.power - r);
            }
            None => s.push('\n'),
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_decimal_half_up() {
        assert_eq!(Proportion::new("a", 30, 42).display, "71.4");
        assert_eq!(Proportion::new("a", 1, 8).display, "12.5");
        assert_eq!(Proportion::new("a", 0, 3).display, "0.0");
        assert_eq!(Proportion::new("a", 14, 14).display, "100.0");
    }

    #[test]
    fn bundled_counts_are_consistent() {
        let c = SurveyCounts::default();
        assert_eq!(c.status, "reconstructed");
        let a = aggregate_survey(&c).unwrap();
        assert_eq!(a.responses, 42);
    }

    #[test]
    fn inconsistent_row_rejected() {
        let mut c = SurveyCounts::default();
        c.preferences.counts[1][0] += 1;
        assert!(matches!(aggregate_survey(&c), Err(StatsError::InconsistentTotals(_))));
    }
}
