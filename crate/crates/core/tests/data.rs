use std::io::Write;

use matrisk_core::data::{
    augment_access, load_csv, load_reader, split, surrogate, to_features, AccessTable,
    CleaningAction, ClinicalField, DataError, Dataset, Division, PlausibilityRanges, RiskLevel,
    ACCESS_SCORE_INDEX, FUZZY_SCORE_INDEX,
};
use matrisk_core::fuzzy::RuleBase;
use matrisk_core::pipeline::{featurize, DataSource};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const HEADER: &str = "Age,SystolicBP,DiastolicBP,BS,BodyTemp,HeartRate,RiskLevel\n";

fn load(text: &str) -> Result<Dataset, DataError> {
    load_reader(text.as_bytes(), "inline", &PlausibilityRanges::default())
}

fn canonical() -> Dataset {
    DataSource::Surrogate {
        seed: surrogate::DEFAULT_SEED,
    }
    .load(&PlausibilityRanges::default())
    .unwrap()
}

#[test]
fn surrogate_has_published_shape() {
    let ds = canonical();
    assert_eq!(ds.provenance().raw_count, 1014);
    assert_eq!(ds.len(), 1014);
    assert_eq!(ds.label_counts(), surrogate::UCI_CLASS_COUNTS);
    assert_eq!(surrogate::generate(7), surrogate::generate(7));
    assert_ne!(surrogate::generate(7), surrogate::generate(8));
}

#[test]
fn csv_file_round_trip() {
    let recs = surrogate::generate(3);
    let mut f = tempfile::NamedTempFile::new().unwrap();
    surrogate::write_csv(&recs, &mut f).unwrap();
    f.flush().unwrap();
    let ds = load_csv(f.path(), &PlausibilityRanges::default()).unwrap();
    assert_eq!(ds.provenance().raw_count, recs.len());
    assert_eq!(ds.records().len() + ds.provenance().drops(), recs.len());
}

#[test]
fn header_only_is_empty_file() {
    assert!(matches!(load(HEADER), Err(DataError::EmptyFile(_))));
}

#[test]
fn missing_column_and_bad_values() {
    assert!(matches!(
        load("Age,SystolicBP,DiastolicBP,BS,BodyTemp,RiskLevel\n25,120,80,7,98,low risk\n"),
        Err(DataError::MissingColumn(c)) if c == "HeartRate"
    ));
    let bad = format!("{HEADER}25,120,eighty,7,98,70,low risk\n");
    assert!(matches!(load(&bad), Err(DataError::UnparsableValue { row: 1, .. })));
    let bad = format!("{HEADER}25,120,80,7,98,70,severe\n");
    assert!(matches!(load(&bad), Err(DataError::UnparsableValue { row: 1, .. })));
}

#[test]
fn single_implausible_field_repaired_with_median() {
    let text = format!(
        "{HEADER}25,120,80,7,98,70,low risk\n30,130,85,8,98,76,mid risk\n\
         35,140,90,9,99,7,high risk\n40,110,70,6,98,80,low risk\n"
    );
    let ds = load(&text).unwrap();
    assert_eq!(ds.len(), 4);
    // Median of the plausible heart rates 70, 76, 80.
    assert_eq!(ds.records()[2].heart_rate, 76.0);
    assert_eq!(ds.provenance().repairs(), 1);
    assert!(matches!(
        ds.provenance().actions[0],
        CleaningAction::Repaired { row: 3, field: ClinicalField::HeartRate, original: 7.0, replacement: 76.0 }
    ));
}

#[test]
fn multiple_implausible_fields_or_inverted_pressure_dropped() {
    let text = format!(
        "{HEADER}25,120,80,7,98,70,low risk\n5,120,80,7,98,7,low risk\n\
         30,80,90,7,98,70,mid risk\n"
    );
    let ds = load(&text).unwrap();
    assert_eq!(ds.len(), 1);
    assert_eq!(ds.provenance().drops(), 2);
    assert_eq!(ds.provenance().raw_count, 3);
}

#[test]
fn augmentation_matches_seeded_draw() {
    let ds = canonical();
    let table = AccessTable::default();
    let a = augment_access(&ds, &table, 42);
    let b = augment_access(&ds, &table, 42);
    assert_eq!(a.records(), b.records());
    assert_eq!(a.provenance(), b.provenance());

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut want = [0usize; 8];
    for _ in 0..ds.len() {
        want[rng.random_range(0..8usize)] += 1;
    }
    let mut got = [0usize; 8];
    for r in a.records() {
        got[Division::ALL.iter().position(|d| Some(*d) == r.division).unwrap()] += 1;
    }
    assert_eq!(got, want);
    assert_eq!(a.provenance().synthetic_divisions, Some(42));
    assert_ne!(augment_access(&ds, &table, 43).records(), a.records());
}

#[test]
fn access_table_must_cover_all_divisions() {
    let seven = AccessTable::default()
        .to_text()
        .lines()
        .filter(|l| !l.starts_with("sylhet"))
        .collect::<Vec<_>>()
        .join("\n");
    assert!(matches!(AccessTable::parse(&seven), Err(DataError::InvalidAccessTable(_))));
    let out_of_range = AccessTable::default().to_text().replace("dhaka = 0.86", "dhaka = 1.5");
    assert!(AccessTable::parse(&out_of_range).is_err());
    assert!(AccessTable::parse("atlantis = 0.5").is_err());
}

#[test]
fn stratified_split_sizes_by_hand() {
    let ds = canonical();
    let (train, test) = split(&ds, 0.2, 42, true).unwrap();
    // round(406 * 0.2) = 81, round(336 * 0.2) = 67, round(272 * 0.2) = 54.
    assert_eq!(test.label_counts(), [81, 67, 54]);
    assert_eq!(test.len(), 202);
    assert_eq!(train.len() + test.len(), 1014);
    let (train2, test2) = split(&ds, 0.2, 42, true).unwrap();
    assert_eq!(train.records(), train2.records());
    assert_eq!(test.records(), test2.records());
    let (_, test3) = split(&ds, 0.2, 43, true).unwrap();
    assert_ne!(test.records(), test3.records());
}

#[test]
fn tiny_and_invalid_splits() {
    let two = load(&format!("{HEADER}25,120,80,7,98,70,low risk\n26,121,80,7,98,70,low risk\n")).unwrap();
    let (a, b) = split(&two, 0.5, 1, true).unwrap();
    assert_eq!((a.len(), b.len()), (1, 1));
    assert!(split(&two, 0.0, 1, true).is_err());
    assert!(split(&two, 1.0, 1, false).is_err());
    let three = load(&format!(
        "{HEADER}25,120,80,7,98,70,low risk\n26,121,80,7,98,70,low risk\n27,121,80,7,98,70,high risk\n"
    ))
    .unwrap();
    assert!(matches!(
        split(&three, 0.5, 1, true),
        Err(DataError::ClassTooSmall { class: RiskLevel::High, count: 1 })
    ));
}

#[test]
fn features_are_fields_then_access_then_score() {
    let ds = augment_access(&canonical(), &AccessTable::default(), 42);
    let table = AccessTable::default();
    let rb = RuleBase::default();
    let f = featurize(&ds.records()[..50], &rb, &table).unwrap();
    for (r, x) in f.records.iter().zip(&f.x) {
        let want = [
            r.age,
            r.systolic_bp,
            r.diastolic_bp,
            r.blood_sugar,
            r.body_temp,
            r.heart_rate,
            table.score(r.division.unwrap()),
            rb.infer(r).score,
        ];
        assert_eq!(x.0, want);
    }
    let mut r = ds.records()[0].clone();
    r.division = Some(Division::Barishal);
    let half = AccessTable::new(Division::ALL.map(|d| (d, 0.5))).unwrap();
    let v = to_features(&r, 0.0, &half).unwrap();
    assert_eq!(v.0[ACCESS_SCORE_INDEX], 0.5);
    assert_eq!(v.0[FUZZY_SCORE_INDEX], 0.0);
    assert!(to_features(&r, 101.0, &half).is_err());
    r.division = None;
    assert!(matches!(to_features(&r, 10.0, &half), Err(DataError::UnknownDivision(_))));
}
