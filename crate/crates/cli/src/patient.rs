//! Patient input parsing with field-level error reporting.
//!
//! Structural problems (missing or non-numeric fields, unknown keys, an
//! unknown division, systolic not above diastolic) are `Invalid`. A
//! well-formed record with a value outside the plausibility ranges is
//! `OutOfRange`.

use matrisk_core::data::{ClinicalField, Division, PatientRecord, PlausibilityRanges, RecordViolation};
use serde_json::{Map, Value};

use crate::error::{FieldError, InputError, InputErrorKind};

fn number(obj: &Map<String, Value>, key: &str, prefix: &str, errs: &mut Vec<FieldError>) -> f64 {
    match obj.get(key) {
        None | Some(Value::Null) => errs.push(FieldError::new(format!("{prefix}{key}"), "is required")),
        Some(Value::Number(n)) => return n.as_f64().unwrap_or(f64::NAN),
        Some(_) => errs.push(FieldError::new(format!("{prefix}{key}"), "must be a number")),
    }
    f64::NAN
}

fn division(v: Option<&Value>, field: &str, required: bool, errs: &mut Vec<FieldError>) -> Option<Division> {
    match v {
        None | Some(Value::Null) => {
            if required {
                errs.push(FieldError::new(field, "is required"));
            }
            None
        }
        Some(Value::String(s)) => match s.parse::<Division>() {
            Ok(d) => Some(d),
            Err(_) => {
                let names: Vec<&str> = Division::ALL.iter().map(|d| d.name()).collect();
                errs.push(FieldError::new(field, format!("unknown division `{s}`; expected one of {}", names.join(", "))));
                None
            }
        },
        Some(_) => {
            errs.push(FieldError::new(field, "must be a string"));
            None
        }
    }
}

/// Turns record invariant violations into field errors, split into
/// structural and range problems.
fn classify(r: &PatientRecord, ranges: &PlausibilityRanges, prefix: &str) -> Result<(), InputError> {
    let mut invalid = Vec::new();
    let mut range = Vec::new();
    for v in r.validate(ranges) {
        match &v {
            RecordViolation::OutOfRange { field, .. } => {
                range.push(FieldError::new(format!("{prefix}{field}"), v.to_string()))
            }
            _ => {
                for f in v.fields() {
                    invalid.push(FieldError::new(format!("{prefix}{f}"), v.to_string()));
                }
            }
        }
    }
    if !invalid.is_empty() {
        return Err(InputError::invalid(invalid));
    }
    if !range.is_empty() {
        return Err(InputError {
            kind: InputErrorKind::OutOfRange,
            fields: range,
        });
    }
    Ok(())
}

/// Parses and validates a patient object. `prefix` is prepended to field
/// names in errors, e.g. `patient.`.
pub fn parse_patient(
    v: &Value,
    ranges: &PlausibilityRanges,
    require_division: bool,
    prefix: &str,
) -> Result<PatientRecord, InputError> {
    let Some(obj) = v.as_object() else {
        return Err(InputError::single(prefix.trim_end_matches('.'), "must be an object"));
    };
    let mut errs = Vec::new();
    for key in obj.keys() {
        let known = key == "division" || key == "risk_label" || key.parse::<ClinicalField>().is_ok();
        if !known {
            errs.push(FieldError::new(format!("{prefix}{key}"), "unknown field"));
        }
    }
    let vals = ClinicalField::ALL.map(|f| number(obj, f.name(), prefix, &mut errs));
    let division = division(obj.get("division"), &format!("{prefix}division"), require_division, &mut errs);
    if !errs.is_empty() {
        return Err(InputError::invalid(errs));
    }
    let r = PatientRecord {
        age: vals[0],
        systolic_bp: vals[1],
        diastolic_bp: vals[2],
        blood_sugar: vals[3],
        body_temp: vals[4],
        heart_rate: vals[5],
        division,
        risk_label: None,
    };
    classify(&r, ranges, prefix)?;
    Ok(r)
}

/// Applies one what-if scenario's overrides to `base` and validates the
/// result. Field names in errors are prefixed with `prefix`.
pub fn apply_overrides(
    base: &PatientRecord,
    overrides: &Value,
    ranges: &PlausibilityRanges,
    prefix: &str,
) -> Result<PatientRecord, InputError> {
    let Some(obj) = overrides.as_object() else {
        return Err(InputError::single(prefix.trim_end_matches('.'), "must be an object of field overrides"));
    };
    if obj.is_empty() {
        return Err(InputError::single(prefix.trim_end_matches('.'), "must override at least one field"));
    }
    let mut r = base.clone();
    let mut errs = Vec::new();
    for (key, value) in obj {
        if key == "division" {
            if let Some(d) = division(Some(value), &format!("{prefix}division"), true, &mut errs) {
                r.division = Some(d);
            }
            continue;
        }
        match key.parse::<ClinicalField>() {
            Ok(field) => match value.as_f64() {
                Some(x) => r.set(field, x),
                None => errs.push(FieldError::new(format!("{prefix}{key}"), "must be a number")),
            },
            Err(_) => errs.push(FieldError::new(format!("{prefix}{key}"), "is not a patient field")),
        }
    }
    if !errs.is_empty() {
        return Err(InputError::invalid(errs));
    }
    classify(&r, ranges, prefix)?;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn ok() -> Value {
        json!({
            "age": 30, "systolic_bp": 120, "diastolic_bp": 80, "blood_sugar": 6.5,
            "body_temp": 98.0, "heart_rate": 72, "division": "dhaka"
        })
    }

    #[test]
    fn valid_patient_parses() {
        let r = parse_patient(&ok(), &PlausibilityRanges::default(), true, "").unwrap();
        assert_eq!(r.systolic_bp, 120.0);
        assert_eq!(r.division, Some(Division::Dhaka));
    }

    #[test]
    fn missing_and_mistyped_fields_all_reported() {
        let mut v = ok();
        v.as_object_mut().unwrap().remove("age");
        v["heart_rate"] = json!("fast");
        v["pulse"] = json!(3);
        let e = parse_patient(&v, &PlausibilityRanges::default(), true, "patient.").unwrap_err();
        assert_eq!(e.kind, InputErrorKind::Invalid);
        let fields: Vec<&str> = e.fields.iter().map(|f| f.field.as_str()).collect();
        assert!(fields.contains(&"patient.age"));
        assert!(fields.contains(&"patient.heart_rate"));
        assert!(fields.contains(&"patient.pulse"));
    }

    #[test]
    fn division_optional_when_not_required() {
        let mut v = ok();
        v.as_object_mut().unwrap().remove("division");
        assert!(parse_patient(&v, &PlausibilityRanges::default(), false, "").is_ok());
        assert!(parse_patient(&v, &PlausibilityRanges::default(), true, "").is_err());
        v["division"] = json!("atlantis");
        assert!(parse_patient(&v, &PlausibilityRanges::default(), false, "").is_err());
    }

    #[test]
    fn range_problems_are_separate_from_structure() {
        let mut v = ok();
        v["systolic_bp"] = json!(250);
        let e = parse_patient(&v, &PlausibilityRanges::default(), true, "").unwrap_err();
        assert_eq!(e.kind, InputErrorKind::OutOfRange);
        v["systolic_bp"] = json!(80);
        let e = parse_patient(&v, &PlausibilityRanges::default(), true, "").unwrap_err();
        assert_eq!(e.kind, InputErrorKind::Invalid);
        assert_eq!(e.fields.len(), 2);
    }

    #[test]
    fn overrides_apply_and_validate() {
        let base = parse_patient(&ok(), &PlausibilityRanges::default(), true, "").unwrap();
        let r = apply_overrides(&base, &json!({"blood_sugar": 9.0}), &PlausibilityRanges::default(), "").unwrap();
        assert_eq!(r.blood_sugar, 9.0);
        assert!(apply_overrides(&base, &json!({"weight": 9.0}), &PlausibilityRanges::default(), "").is_err());
        assert!(apply_overrides(&base, &json!({}), &PlausibilityRanges::default(), "").is_err());
        let e = apply_overrides(&base, &json!({"heart_rate": 300}), &PlausibilityRanges::default(), "o.").unwrap_err();
        assert_eq!(e.kind, InputErrorKind::OutOfRange);
        assert_eq!(e.fields[0].field, "o.heart_rate");
    }
}
