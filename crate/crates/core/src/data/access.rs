//! Regional healthcare-access scores keyed by division.
//!
//! The file format is one `division = score` pair per line. Blank lines and
//! lines starting with `#` are ignored. All eight divisions must be present
//! exactly once and every score must lie in `[0, 1]`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{DataError, Division};

/// Placeholder table shipped with the crate. The values are synthetic.
pub const DEFAULT_ACCESS_TABLE: &str = include_str!("../../../../config/access_table.txt");

#[derive(Debug, Clone, PartialEq)]
pub struct AccessTable {
    scores: BTreeMap<Division, f64>,
}

impl AccessTable {
    pub fn new(entries: impl IntoIterator<Item = (Division, f64)>) -> Result<Self, DataError> {
        let mut scores = BTreeMap::new();
        for (division, score) in entries {
            if !(0.0..=1.0).contains(&score) {
                return Err(DataError::InvalidAccessTable(format!(
                    "score for {division} is {score}, expected a value in [0, 1]"
                )));
            }
            if scores.insert(division, score).is_some() {
                return Err(DataError::InvalidAccessTable(format!(
                    "division {division} listed more than once"
                )));
            }
        }
        if scores.len() != Division::ALL.len() {
            let missing: Vec<_> = Division::ALL
                .iter()
                .filter(|d| !scores.contains_key(d))
                .map(|d| d.name())
                .collect();
            return Err(DataError::InvalidAccessTable(format!(
                "expected {} divisions, found {} (missing: {})",
                Division::ALL.len(),
                scores.len(),
                missing.join(", ")
            )));
        }
        Ok(Self { scores })
    }

    pub fn parse(text: &str) -> Result<Self, DataError> {
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                DataError::InvalidAccessTable(format!(
                    "line {}: expected `division = score`",
                    lineno + 1
                ))
            })?;
            let division: Division = key.parse()?;
            let score: f64 = value.trim().parse().map_err(|_| {
                DataError::InvalidAccessTable(format!(
                    "line {}: `{}` is not a number",
                    lineno + 1,
                    value.trim()
                ))
            })?;
            entries.push((division, score));
        }
        Self::new(entries)
    }

    pub fn from_file(path: &Path) -> Result<Self, DataError> {
        let text = std::fs::read_to_string(path).map_err(|e| DataError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn score(&self, division: Division) -> f64 {
        // Construction guarantees all eight keys.
        self.scores[&division]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Division, f64)> + '_ {
        self.scores.iter().map(|(d, s)| (*d, *s))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (d, s) in self.iter() {
            let _ = writeln!(out, "{d} = {s}");
        }
        out
    }
}

impl Default for AccessTable {
    fn default() -> Self {
        Self::parse(DEFAULT_ACCESS_TABLE).expect("bundled access table is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_table_is_valid_and_in_placeholder_band() {
        let t = AccessTable::default();
        assert_eq!(t.iter().count(), 8);
        assert!(t.iter().all(|(_, s)| (0.3..=0.9).contains(&s)));
    }

    #[test]
    fn seven_entries_rejected() {
        let text: String = AccessTable::default()
            .iter()
            .skip(1)
            .map(|(d, s)| format!("{d} = {s}\n"))
            .collect();
        assert!(matches!(
            AccessTable::parse(&text),
            Err(DataError::InvalidAccessTable(_))
        ));
    }

    #[test]
    fn out_of_unit_interval_rejected() {
        let mut entries: Vec<_> = AccessTable::default().iter().collect();
        entries[0].1 = 1.5;
        assert!(AccessTable::new(entries).is_err());
    }

    #[test]
    fn text_round_trip() {
        let t = AccessTable::default();
        assert_eq!(AccessTable::parse(&t.to_text()).unwrap(), t);
    }
}
