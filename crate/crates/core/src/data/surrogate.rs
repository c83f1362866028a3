//! Deterministic stand-in for the UCI maternal health risk file.
//!
//! Produces rows in the UCI schema with the published class counts
//! (406 low / 336 mid / 272 high, N = 1,014), the file's heavy duplication
//! (roughly 450 distinct rows, the rest repeats) and its two heart-rate
//! outlier rows (`16,120,75,7.9,98,7,low risk`). Class-conditional
//! distributions are rough approximations of the public file's per-class
//! summaries. Nothing here is real patient data; use the real file when it
//! is available.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Normal};

use super::{ClinicalField, PatientRecord, RiskLevel};

pub const UCI_HEADER: &str = "Age,SystolicBP,DiastolicBP,BS,BodyTemp,HeartRate,RiskLevel";
pub const UCI_CLASS_COUNTS: [usize; 3] = [406, 336, 272];
/// Distinct profiles per class before duplication.
const POOL_SIZES: [usize; 3] = [234, 106, 112];
pub const DEFAULT_SEED: u64 = 1014;

struct ClassProfile {
    age: (f64, f64),
    systolic: (f64, f64),
    blood_sugar_high_p: f64,
    blood_sugar_base: (f64, f64),
    fever_p: f64,
    heart_rate: (f64, f64),
}

fn profile(level: RiskLevel) -> ClassProfile {
    match level {
        RiskLevel::Low => ClassProfile {
            age: (26.0, 9.0),
            systolic: (106.0, 13.0),
            blood_sugar_high_p: 0.05,
            blood_sugar_base: (7.0, 0.45),
            fever_p: 0.08,
            heart_rate: (73.0, 7.0),
        },
        RiskLevel::Mid => ClassProfile {
            age: (28.5, 12.0),
            systolic: (113.0, 14.0),
            blood_sugar_high_p: 0.12,
            blood_sugar_base: (7.4, 0.7),
            fever_p: 0.25,
            heart_rate: (74.5, 7.0),
        },
        RiskLevel::High => ClassProfile {
            age: (36.0, 13.0),
            systolic: (124.0, 18.0),
            blood_sugar_high_p: 0.55,
            blood_sugar_base: (7.8, 0.8),
            fever_p: 0.30,
            heart_rate: (77.0, 7.5),
        },
    }
}

fn round_to(x: f64, step: f64) -> f64 {
    (x / step).round() * step
}

fn draw_profile(level: RiskLevel, rng: &mut ChaCha8Rng) -> PatientRecord {
    let p = profile(level);
    let normal = |(m, s): (f64, f64), rng: &mut ChaCha8Rng| {
        Normal::new(m, s).expect("finite parameters").sample(rng)
    };
    let age = normal(p.age, rng).round().clamp(10.0, 70.0);
    let systolic = round_to(normal(p.systolic, rng), 5.0).clamp(70.0, 160.0);
    let diastolic = round_to(0.68 * systolic + normal((0.0, 6.0), rng), 5.0)
        .clamp(49.0, 100.0)
        .min(systolic - 10.0);
    let blood_sugar = if rng.random_bool(p.blood_sugar_high_p) {
        round_to(rng.random_range(9.5..19.0), 0.5)
    } else {
        round_to(normal(p.blood_sugar_base, rng), 0.1).clamp(6.0, 9.0)
    };
    let body_temp = if rng.random_bool(p.fever_p) {
        f64::from(rng.random_range(99..=103))
    } else {
        98.0
    };
    let heart_rate = normal(p.heart_rate, rng).round().clamp(60.0, 90.0);
    PatientRecord {
        age,
        systolic_bp: systolic,
        diastolic_bp: diastolic,
        blood_sugar,
        body_temp,
        heart_rate,
        division: None,
        risk_label: Some(level),
    }
}

/// Generates the surrogate records for `seed`.
pub fn generate(seed: u64) -> Vec<PatientRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(UCI_CLASS_COUNTS.iter().sum());
    for level in RiskLevel::ALL {
        let pool: Vec<PatientRecord> = (0..POOL_SIZES[level.index()])
            .map(|_| draw_profile(level, &mut rng))
            .collect();
        // Skewed repeat weights: a few profiles recur many times, as in the UCI file.
        let weights: Vec<f64> = pool
            .iter()
            .map(|_| {
                let e: f64 = Exp1.sample(&mut rng);
                e * e
            })
            .collect();
        let total: f64 = weights.iter().sum();
        let mut class_rows = pool.clone();
        while class_rows.len() < UCI_CLASS_COUNTS[level.index()] {
            let mut u = rng.random::<f64>() * total;
            let mut pick = pool.len() - 1;
            for (i, w) in weights.iter().enumerate() {
                if u < *w {
                    pick = i;
                    break;
                }
                u -= w;
            }
            class_rows.push(pool[pick].clone());
        }
        if level == RiskLevel::Low {
            let outlier = PatientRecord {
                age: 16.0,
                systolic_bp: 120.0,
                diastolic_bp: 75.0,
                blood_sugar: 7.9,
                body_temp: 98.0,
                heart_rate: 7.0,
                division: None,
                risk_label: Some(RiskLevel::Low),
            };
            let n = class_rows.len();
            class_rows[n - 1] = outlier.clone();
            class_rows[n - 2] = outlier;
        }
        rows.extend(class_rows);
    }
    rows.shuffle(&mut rng);
    rows
}

fn format_value(field: ClinicalField, v: f64) -> String {
    match field {
        ClinicalField::BloodSugar if v.fract() != 0.0 => format!("{v:.1}"),
        _ => format!("{}", v.round() as i64),
    }
}

/// Writes records in the UCI CSV layout.
pub fn write_csv<W: Write>(records: &[PatientRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{UCI_HEADER}")?;
    for r in records {
        let cells: Vec<String> = ClinicalField::ALL
            .iter()
            .map(|f| format_value(*f, r.get(*f)))
            .collect();
        let label = r.risk_label.map_or("", RiskLevel::csv_label);
        writeln!(out, "{},{label}", cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn class_counts_and_size() {
        let rows = generate(DEFAULT_SEED);
        assert_eq!(rows.len(), 1014);
        let mut counts = [0; 3];
        for r in &rows {
            counts[r.risk_label.unwrap().index()] += 1;
        }
        assert_eq!(counts, UCI_CLASS_COUNTS);
    }

    #[test]
    fn heavy_duplication_and_outliers() {
        let rows = generate(DEFAULT_SEED);
        let distinct: HashSet<String> = rows
            .iter()
            .map(|r| format!("{:?}", (r.clinical_values(), r.risk_label)))
            .collect();
        assert!(distinct.len() < 500, "{} distinct", distinct.len());
        assert_eq!(rows.iter().filter(|r| r.heart_rate == 7.0).count(), 2);
        assert!(rows.iter().all(|r| r.systolic_bp > r.diastolic_bp));
    }

    #[test]
    fn deterministic() {
        assert_eq!(generate(5), generate(5));
        assert_ne!(generate(5), generate(6));
    }
}
