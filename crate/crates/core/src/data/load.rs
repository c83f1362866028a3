use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ClinicalField, DataError, PatientRecord, PlausibilityRanges, RiskLevel};

pub const LABEL_COLUMN: &str = "RiskLevel";

/// Something the loader did to the raw rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum CleaningAction {
    Repaired {
        row: usize,
        field: ClinicalField,
        original: f64,
        replacement: f64,
    },
    Dropped {
        row: usize,
        reason: String,
    },
}

impl fmt::Display for CleaningAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CleaningAction::Repaired { row, field, original, replacement } => write!(
                f,
                "row {row}: {field}={original} implausible, replaced by column median {replacement}"
            ),
            CleaningAction::Dropped { row, reason } => write!(f, "row {row}: dropped ({reason})"),
        }
    }
}

/// Where a dataset came from and what was done to it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub raw_count: usize,
    pub actions: Vec<CleaningAction>,
    /// Set once divisions have been drawn by [`super::augment_access`].
    pub synthetic_divisions: Option<u64>,
    pub notes: Vec<String>,
}

impl Provenance {
    pub fn repairs(&self) -> usize {
        self.actions
            .iter()
            .filter(|a| matches!(a, CleaningAction::Repaired { .. }))
            .count()
    }

    pub fn drops(&self) -> usize {
        self.actions
            .iter()
            .filter(|a| matches!(a, CleaningAction::Dropped { .. }))
            .count()
    }
}

/// An immutable collection of patient records plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<PatientRecord>,
    provenance: Provenance,
}

impl Dataset {
    pub fn new(records: Vec<PatientRecord>, provenance: Provenance) -> Self {
        Self { records, provenance }
    }

    pub fn records(&self) -> &[PatientRecord] {
        &self.records
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Count of records per class, indexed by [`RiskLevel::index`].
    /// Unlabelled records are not counted.
    pub fn label_counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for r in &self.records {
            if let Some(l) = r.risk_label {
                counts[l.index()] += 1;
            }
        }
        counts
    }

    pub fn labels(&self) -> Option<Vec<RiskLevel>> {
        self.records.iter().map(|r| r.risk_label).collect()
    }
}

/// Reads the UCI maternal-health CSV and applies the cleaning policy.
pub fn load_csv(path: &Path, ranges: &PlausibilityRanges) -> Result<Dataset, DataError> {
    let file = std::fs::File::open(path).map_err(|e| DataError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    load_reader(file, &path.display().to_string(), ranges)
}

/// Same as [`load_csv`] over any reader; `source` is recorded in provenance.
pub fn load_reader<R: Read>(
    reader: R,
    source: &str,
    ranges: &PlausibilityRanges,
) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}') == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let field_cols = ClinicalField::ALL.map(|f| find(f.csv_column()));
    let mut cols = [0usize; 6];
    for (slot, col) in cols.iter_mut().zip(field_cols) {
        *slot = col?;
    }
    let label_col = find(LABEL_COLUMN)?;

    let mut raw: Vec<(usize, PatientRecord)> = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let rowno = i + 1;
        let mut values = [0.0f64; 6];
        for (k, field) in ClinicalField::ALL.iter().enumerate() {
            let cell = row.get(cols[k]).unwrap_or("");
            values[k] = cell.parse::<f64>().map_err(|_| DataError::UnparsableValue {
                row: rowno,
                column: field.csv_column().to_string(),
                value: cell.to_string(),
            })?;
        }
        let cell = row.get(label_col).unwrap_or("");
        let label: RiskLevel = cell.parse().map_err(|_| DataError::UnparsableValue {
            row: rowno,
            column: LABEL_COLUMN.to_string(),
            value: cell.to_string(),
        })?;
        raw.push((
            rowno,
            PatientRecord {
                age: values[0],
                systolic_bp: values[1],
                diastolic_bp: values[2],
                blood_sugar: values[3],
                body_temp: values[4],
                heart_rate: values[5],
                division: None,
                risk_label: Some(label),
            },
        ));
    }
    if raw.is_empty() {
        return Err(DataError::EmptyFile(source.to_string()));
    }

    let raw_count = raw.len();
    let (records, actions) = clean(raw, ranges);
    log::info!(
        "loaded {} of {} rows from {source} ({} cleaning actions)",
        records.len(),
        raw_count,
        actions.len()
    );
    Ok(Dataset::new(
        records,
        Provenance {
            source: source.to_string(),
            raw_count,
            actions,
            synthetic_divisions: None,
            notes: Vec::new(),
        },
    ))
}

/// Median of the plausible values of each clinical column.
pub fn plausible_medians(records: &[PatientRecord], ranges: &PlausibilityRanges) -> [f64; 6] {
    ClinicalField::ALL.map(|field| {
        let mut vals: Vec<f64> = records
            .iter()
            .map(|r| r.get(field))
            .filter(|v| ranges.contains(field, *v))
            .collect();
        median(&mut vals).unwrap_or(f64::NAN)
    })
}

fn median(vals: &mut [f64]) -> Option<f64> {
    if vals.is_empty() {
        return None;
    }
    vals.sort_by(f64::total_cmp);
    let n = vals.len();
    Some(if n % 2 == 1 {
        vals[n / 2]
    } else {
        0.5 * (vals[n / 2 - 1] + vals[n / 2])
    })
}

/// Single implausible field: replace with the column median. Anything worse: drop.
fn clean(
    raw: Vec<(usize, PatientRecord)>,
    ranges: &PlausibilityRanges,
) -> (Vec<PatientRecord>, Vec<CleaningAction>) {
    let all: Vec<PatientRecord> = raw.iter().map(|(_, r)| r.clone()).collect();
    let medians = plausible_medians(&all, ranges);

    let mut kept = Vec::with_capacity(raw.len());
    let mut actions = Vec::new();
    for (rowno, mut rec) in raw {
        let bad: Vec<ClinicalField> = ClinicalField::ALL
            .into_iter()
            .filter(|f| !ranges.contains(*f, rec.get(*f)))
            .collect();
        match bad.as_slice() {
            [] => {}
            [field] => {
                let original = rec.get(*field);
                rec.set(*field, medians[field.index()]);
                actions.push(CleaningAction::Repaired {
                    row: rowno,
                    field: *field,
                    original,
                    replacement: medians[field.index()],
                });
            }
            many => {
                let names: Vec<_> = many.iter().map(|f| f.name()).collect();
                actions.push(CleaningAction::Dropped {
                    row: rowno,
                    reason: format!("implausible fields: {}", names.join(", ")),
                });
                continue;
            }
        }
        if rec.systolic_bp <= rec.diastolic_bp {
            actions.push(CleaningAction::Dropped {
                row: rowno,
                reason: format!(
                    "systolic_bp {} not above diastolic_bp {}",
                    rec.systolic_bp, rec.diastolic_bp
                ),
            });
            continue;
        }
        kept.push(rec);
    }
    (kept, actions)
}
