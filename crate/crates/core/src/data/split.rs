use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AccessTable, DataError, Dataset, Division, PatientRecord, Provenance};

/// Assigns every record a division drawn uniformly from the eight divisions.
///
/// The draw is a ChaCha8 stream seeded with `seed`, one `0..8` index per record
/// in record order. Records keep any division they already carry.
pub fn augment_access(ds: &Dataset, table: &AccessTable, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records: Vec<PatientRecord> = ds
        .records()
        .iter()
        .map(|r| {
            let draw = Division::ALL[rng.random_range(0..Division::ALL.len())];
            let mut r = r.clone();
            r.division.get_or_insert(draw);
            r
        })
        .collect();
    let mut provenance = ds.provenance().clone();
    provenance.synthetic_divisions = Some(seed);
    provenance.notes.push(format!(
        "divisions drawn uniformly at random (seed {seed}); access scores are synthetic: {}",
        table
            .iter()
            .map(|(d, s)| format!("{d}={s}"))
            .collect::<Vec<_>>()
            .join(" ")
    ));
    Dataset::new(records, provenance)
}

/// Partitions `ds` into (train, test).
///
/// Stratified splits take `round(n_c * test_fraction)` records of each class
/// for the test side, chosen by a seeded shuffle of that class's indices.
/// Both sides keep the original record order.
pub fn split(
    ds: &Dataset,
    test_fraction: f64,
    seed: u64,
    stratified: bool,
) -> Result<(Dataset, Dataset), DataError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DataError::InvalidArgument(format!(
            "test_fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = ds.len();
    let mut is_test = vec![false; n];

    if stratified {
        let labels = ds.labels().ok_or_else(|| {
            DataError::InvalidArgument("stratified split needs labelled records".into())
        })?;
        for class in super::RiskLevel::ALL {
            let mut idx: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
            if idx.is_empty() {
                continue;
            }
            let n_test = (idx.len() as f64 * test_fraction).round() as usize;
            if idx.len() < 2 || n_test == 0 || n_test == idx.len() {
                return Err(DataError::ClassTooSmall {
                    class,
                    count: idx.len(),
                });
            }
            idx.shuffle(&mut rng);
            for &i in &idx[..n_test] {
                is_test[i] = true;
            }
        }
    } else {
        let n_test = (n as f64 * test_fraction).round() as usize;
        if n_test == 0 || n_test == n {
            return Err(DataError::InvalidArgument(format!(
                "split of {n} records at fraction {test_fraction} leaves an empty side"
            )));
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        for &i in &idx[..n_test] {
            is_test[i] = true;
        }
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (r, t) in ds.records().iter().zip(&is_test) {
        if *t {
            test.push(r.clone());
        } else {
            train.push(r.clone());
        }
    }
    let note = |side: &str| {
        let mut p: Provenance = ds.provenance().clone();
        p.notes.push(format!(
            "{side} side of {} split, test_fraction={test_fraction}, seed={seed}",
            if stratified { "stratified" } else { "random" }
        ));
        p
    };
    Ok((Dataset::new(train, note("train")), Dataset::new(test, note("test"))))
}
