use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DataError;

/// Ordinal risk label used throughout the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskLevel {
    Low = 0,
    Mid = 1,
    High = 2,
}

impl RiskLevel {
    pub const ALL: [RiskLevel; 3] = [RiskLevel::Low, RiskLevel::Mid, RiskLevel::High];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Label as written in the UCI file.
    pub fn csv_label(self) -> &'static str {
        match self {
            RiskLevel::Low => "low risk",
            RiskLevel::Mid => "mid risk",
            RiskLevel::High => "high risk",
        }
    }
}

impl fmt::Display for RiskLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RiskLevel::Low => "Low",
            RiskLevel::Mid => "Mid",
            RiskLevel::High => "High",
        })
    }
}

impl FromStr for RiskLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "low risk" | "low" => Ok(RiskLevel::Low),
            "mid risk" | "mid" | "medium" => Ok(RiskLevel::Mid),
            "high risk" | "high" => Ok(RiskLevel::High),
            other => Err(format!("unknown risk label `{other}`")),
        }
    }
}

/// The eight administrative divisions of Bangladesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Division {
    Barishal,
    Chattogram,
    Dhaka,
    Khulna,
    Mymensingh,
    Rajshahi,
    Rangpur,
    Sylhet,
}

impl Division {
    pub const ALL: [Division; 8] = [
        Division::Barishal,
        Division::Chattogram,
        Division::Dhaka,
        Division::Khulna,
        Division::Mymensingh,
        Division::Rajshahi,
        Division::Rangpur,
        Division::Sylhet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Division::Barishal => "barishal",
            Division::Chattogram => "chattogram",
            Division::Dhaka => "dhaka",
            Division::Khulna => "khulna",
            Division::Mymensingh => "mymensingh",
            Division::Rajshahi => "rajshahi",
            Division::Rangpur => "rangpur",
            Division::Sylhet => "sylhet",
        }
    }
}

impl fmt::Display for Division {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Division {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        // Older spellings still common in administrative data.
        let key = match key.as_str() {
            "barisal" => "barishal",
            "chittagong" => "chattogram",
            other => other,
        };
        Division::ALL
            .iter()
            .copied()
            .find(|d| d.name() == key)
            .ok_or_else(|| DataError::UnknownDivision(s.trim().to_string()))
    }
}

/// The six clinical measurements of a record, in feature-contract order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClinicalField {
    Age,
    SystolicBp,
    DiastolicBp,
    BloodSugar,
    BodyTemp,
    HeartRate,
}

impl ClinicalField {
    pub const ALL: [ClinicalField; 6] = [
        ClinicalField::Age,
        ClinicalField::SystolicBp,
        ClinicalField::DiastolicBp,
        ClinicalField::BloodSugar,
        ClinicalField::BodyTemp,
        ClinicalField::HeartRate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClinicalField::Age => "age",
            ClinicalField::SystolicBp => "systolic_bp",
            ClinicalField::DiastolicBp => "diastolic_bp",
            ClinicalField::BloodSugar => "blood_sugar",
            ClinicalField::BodyTemp => "body_temp",
            ClinicalField::HeartRate => "heart_rate",
        }
    }

    pub fn csv_column(self) -> &'static str {
        match self {
            ClinicalField::Age => "Age",
            ClinicalField::SystolicBp => "SystolicBP",
            ClinicalField::DiastolicBp => "DiastolicBP",
            ClinicalField::BloodSugar => "BS",
            ClinicalField::BodyTemp => "BodyTemp",
            ClinicalField::HeartRate => "HeartRate",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            ClinicalField::Age => "years",
            ClinicalField::SystolicBp | ClinicalField::DiastolicBp => "mmHg",
            ClinicalField::BloodSugar => "mmol/L",
            ClinicalField::BodyTemp => "degF",
            ClinicalField::HeartRate => "bpm",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for ClinicalField {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClinicalField::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s.trim())
            .ok_or_else(|| format!("unknown clinical field `{}`", s.trim()))
    }
}

impl fmt::Display for ClinicalField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One maternal case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientRecord {
    pub age: f64,
    pub systolic_bp: f64,
    pub diastolic_bp: f64,
    pub blood_sugar: f64,
    pub body_temp: f64,
    pub heart_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub division: Option<Division>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub risk_label: Option<RiskLevel>,
}

impl PatientRecord {
    pub fn get(&self, field: ClinicalField) -> f64 {
        match field {
            ClinicalField::Age => self.age,
            ClinicalField::SystolicBp => self.systolic_bp,
            ClinicalField::DiastolicBp => self.diastolic_bp,
            ClinicalField::BloodSugar => self.blood_sugar,
            ClinicalField::BodyTemp => self.body_temp,
            ClinicalField::HeartRate => self.heart_rate,
        }
    }

    pub fn set(&mut self, field: ClinicalField, value: f64) {
        match field {
            ClinicalField::Age => self.age = value,
            ClinicalField::SystolicBp => self.systolic_bp = value,
            ClinicalField::DiastolicBp => self.diastolic_bp = value,
            ClinicalField::BloodSugar => self.blood_sugar = value,
            ClinicalField::BodyTemp => self.body_temp = value,
            ClinicalField::HeartRate => self.heart_rate = value,
        }
    }

    /// Value of a clinical field looked up by its snake_case name.
    pub fn value_by_name(&self, name: &str) -> Option<f64> {
        name.parse::<ClinicalField>().ok().map(|f| self.get(f))
    }

    pub fn clinical_values(&self) -> [f64; 6] {
        ClinicalField::ALL.map(|f| self.get(f))
    }

    /// Checks the record invariants against `ranges`, collecting every
    /// violation instead of stopping at the first.
    pub fn validate(&self, ranges: &PlausibilityRanges) -> Vec<RecordViolation> {
        let mut out = Vec::new();
        for field in ClinicalField::ALL {
            let v = self.get(field);
            if !v.is_finite() {
                out.push(RecordViolation::NonFinite(field));
            } else if !ranges.contains(field, v) {
                let (lo, hi) = ranges.bounds(field);
                out.push(RecordViolation::OutOfRange { field, value: v, lo, hi });
            }
        }
        if self.systolic_bp.is_finite()
            && self.diastolic_bp.is_finite()
            && self.systolic_bp <= self.diastolic_bp
        {
            out.push(RecordViolation::PulsePressure {
                systolic: self.systolic_bp,
                diastolic: self.diastolic_bp,
            });
        }
        out
    }
}

/// A single invariant violation on a [`PatientRecord`].
#[derive(Debug, Clone, PartialEq)]
pub enum RecordViolation {
    NonFinite(ClinicalField),
    OutOfRange {
        field: ClinicalField,
        value: f64,
        lo: f64,
        hi: f64,
    },
    PulsePressure {
        systolic: f64,
        diastolic: f64,
    },
}

impl RecordViolation {
    /// Field names the violation refers to.
    pub fn fields(&self) -> Vec<&'static str> {
        match self {
            RecordViolation::NonFinite(f) | RecordViolation::OutOfRange { field: f, .. } => {
                vec![f.name()]
            }
            RecordViolation::PulsePressure { .. } => vec!["systolic_bp", "diastolic_bp"],
        }
    }
}

impl fmt::Display for RecordViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecordViolation::NonFinite(field) => write!(f, "{field} must be a finite number"),
            RecordViolation::OutOfRange { field, value, lo, hi } => write!(
                f,
                "{field}={value} is outside the plausible range [{lo}, {hi}] {}",
                field.unit()
            ),
            RecordViolation::PulsePressure { systolic, diastolic } => write!(
                f,
                "systolic_bp ({systolic}) must be greater than diastolic_bp ({diastolic})"
            ),
        }
    }
}

/// Per-field plausibility bounds used by the cleaning policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlausibilityRanges {
    pub age: (f64, f64),
    pub systolic_bp: (f64, f64),
    pub diastolic_bp: (f64, f64),
    pub blood_sugar: (f64, f64),
    pub body_temp: (f64, f64),
    pub heart_rate: (f64, f64),
}

impl Default for PlausibilityRanges {
    fn default() -> Self {
        Self {
            age: (10.0, 70.0),
            systolic_bp: (70.0, 200.0),
            diastolic_bp: (40.0, 140.0),
            blood_sugar: (2.0, 30.0),
            body_temp: (95.0, 106.0),
            heart_rate: (40.0, 200.0),
        }
    }
}

impl PlausibilityRanges {
    pub fn bounds(&self, field: ClinicalField) -> (f64, f64) {
        match field {
            ClinicalField::Age => self.age,
            ClinicalField::SystolicBp => self.systolic_bp,
            ClinicalField::DiastolicBp => self.diastolic_bp,
            ClinicalField::BloodSugar => self.blood_sugar,
            ClinicalField::BodyTemp => self.body_temp,
            ClinicalField::HeartRate => self.heart_rate,
        }
    }

    pub fn contains(&self, field: ClinicalField, v: f64) -> bool {
        let (lo, hi) = self.bounds(field);
        v.is_finite() && v >= lo && v <= hi
    }
}
