use std::path::Path;
use std::process::{Command, Output};

use matrisk_core::data::{load_csv, PlausibilityRanges};

const PATIENT: [&str; 14] = [
    "--age", "38", "--systolic-bp", "145", "--diastolic-bp", "95", "--blood-sugar", "9",
    "--body-temp", "98", "--heart-rate", "86", "--division", "dhaka",
];

fn matrisk(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matrisk"))
        .args(args)
        .current_dir(cwd)
        .env_remove("MATRISK_MODEL")
        .env_remove("MATRISK_UCI_CSV")
        .env("MATRISK_LOG", "warn")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A directory holding `model.json` trained with the default config.
fn trained() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let o = matrisk(&["train", "--model", "model.json", "--seed", "42", "--metrics", "train_metrics.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("model.json").is_file());
    assert!(dir.path().join("model.train.json").is_file());
    dir
}

#[test]
fn predict_without_model_reports_not_found() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["predict", "--model", "absent.json"];
    args.extend(PATIENT);
    let o = matrisk(&args, dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("model not found"), "{}", stderr(&o));
}

#[test]
fn train_then_evaluate_writes_metrics() {
    let dir = trained();
    let o = matrisk(&["evaluate", "--model", "model.json", "--out", "metrics.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("metrics.json")).unwrap();
    let m: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(m["accuracy"].as_f64().unwrap() >= 0.80, "{m}");
    assert!(m["macro_auc"].as_f64().unwrap() >= 0.90, "{m}");
    let at_train: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("train_metrics.json")).unwrap()).unwrap();
    assert_eq!(m, at_train);
    assert_eq!(serde_json::from_str::<serde_json::Value>(&stdout(&o)).unwrap(), m);

    let mut args = vec!["explain", "--model", "model.json", "--type", "C"];
    args.extend(PATIENT);
    let o = matrisk(&args, dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("Predicted risk"));
    assert!(!text.contains("Fuzzy rules") && !text.contains("Feature contributions"), "{text}");

    args.extend(["--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&matrisk(&args, dir.path()).stdout).unwrap();
    assert!(v.get("fuzzy").is_none() && v.get("shap").is_none());

    let mut args = vec!["explain", "--model", "model.json", "--type", "A"];
    args.extend(PATIENT);
    let text = stdout(&matrisk(&args, dir.path()));
    assert!(text.contains("Fuzzy rules") && text.contains("Feature contributions") && text.contains("Clinical parameters"));

    let mut args = vec!["predict", "--model", "model.json", "--format", "json"];
    args.extend(PATIENT);
    let v: serde_json::Value = serde_json::from_slice(&matrisk(&args, dir.path()).stdout).unwrap();
    assert_eq!(v["prediction"]["class"], "high");
    assert_eq!(v["features"]["access_score"], 0.86);
}

#[test]
fn model_path_from_environment() {
    let dir = trained();
    let mut args = vec!["predict"];
    args.extend(PATIENT);
    let o = Command::new(env!("CARGO_BIN_EXE_matrisk"))
        .args(&args)
        .current_dir(std::env::temp_dir())
        .env("MATRISK_MODEL", dir.path().join("model.json"))
        .env("MATRISK_LOG", "warn")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("Model version"));
}

#[test]
fn invalid_inputs_and_files_have_distinct_exit_codes() {
    let dir = trained();
    let o = matrisk(&["predict", "--model", "model.json", "--age", "30"], dir.path());
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("systolic_bp: is required"));

    std::fs::write(dir.path().join("broken.json"), "{\"format\": \"matrisk-tree-ensemble\"").unwrap();
    let mut args = vec!["predict", "--model", "broken.json"];
    args.extend(PATIENT);
    assert_eq!(matrisk(&args, dir.path()).status.code(), Some(4));

    let text = std::fs::read_to_string(dir.path().join("model.json")).unwrap();
    std::fs::write(dir.path().join("future.json"), text.replacen("\"version\": 1", "\"version\": 999", 1)).unwrap();
    let mut args = vec!["predict", "--model", "future.json"];
    args.extend(PATIENT);
    let o = matrisk(&args, dir.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("999"));

    assert_eq!(matrisk(&["predict", "--bogus"], dir.path()).status.code(), Some(2));
    assert_eq!(matrisk(&["train", "--data", "missing.csv"], dir.path()).status.code(), Some(6));
    std::fs::write(dir.path().join("bad.toml"), "[train]\nrounds = 0\n").unwrap();
    assert_eq!(matrisk(&["--config", "bad.toml", "stats"], dir.path()).status.code(), Some(7));
}

#[test]
fn patient_from_json_file() {
    let dir = trained();
    std::fs::write(
        dir.path().join("p.json"),
        r#"{"age": 38, "systolic_bp": 145, "diastolic_bp": 95, "blood_sugar": 9, "body_temp": 98, "heart_rate": 86, "division": "dhaka"}"#,
    )
    .unwrap();
    let a = matrisk(&["predict", "--model", "model.json", "--patient", "p.json"], dir.path());
    let mut args = vec!["predict", "--model", "model.json"];
    args.extend(PATIENT);
    let b = matrisk(&args, dir.path());
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn fuzzy_score_needs_no_model_or_division() {
    let dir = tempfile::tempdir().unwrap();
    let o = matrisk(
        &["fuzzy-score", "--age", "25", "--systolic-bp", "110", "--diastolic-bp", "70", "--blood-sugar", "4.5",
          "--body-temp", "98", "--heart-rate", "75", "--format", "json"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["score"].as_f64().unwrap() < 40.0);
    assert_eq!(v["fallback"], false);
}

#[test]
fn stats_report_contains_survey_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&matrisk(&["stats"], dir.path()));
    assert!(text.contains("71.4%"));
    assert!(text.contains("not derivable from the published counts"));
    let v: serde_json::Value = serde_json::from_slice(&matrisk(&["stats", "--format", "json"], dir.path()).stdout).unwrap();
    assert!((v["preference_chi_square"]["statistic"].as_f64().unwrap() - 8.4).abs() < 1e-9);
}

#[test]
fn synth_data_round_trips_through_loader() {
    let dir = tempfile::tempdir().unwrap();
    let o = matrisk(&["synth-data", "--seed", "1014", "--out", "s.csv"], dir.path());
    assert!(o.status.success());
    let ds = load_csv(&dir.path().join("s.csv"), &PlausibilityRanges::default()).unwrap();
    assert_eq!(ds.provenance().raw_count, 1014);
    let piped = matrisk(&["synth-data", "--seed", "1014"], dir.path());
    assert_eq!(piped.stdout, std::fs::read(dir.path().join("s.csv")).unwrap());
}
