//! Animal-by-measurement tables: loading, validation, replicate averaging,
//! grader-score aggregation and descriptive statistics.
//!
//! A [`HerdTable`] is rectangular. Every animal has a finite value for every
//! column, and missing cells are rejected at load time instead of being
//! imputed. When the three grader columns `S1`, `S2` and `S3` are present the
//! structure score `SS` is derived as their unweighted mean.

use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{mean, quantile_sorted, sample_std};

/// Measurement symbols with a fixed meaning.
///
/// `BW` body weight; `CH`, `WH`, `RH` croup, withers and rib height; `SL`
/// side length; `SVH` sub-sternal void height; `SA` side area; `CW` croup
/// width; `DL`, `DA` dorsum length and area; `FW`, `DMI`, `RFI`, `ADG`, `SC`
/// feeding-trial productivity metrics; `LEA` loin eye area; `S1`..`S3` grader
/// scores and `SS` their mean.
pub const STANDARD_KEYS: [&str; 20] = [
    "BW", "CH", "WH", "RH", "SL", "SVH", "SA", "CW", "DL", "DA", "FW", "DMI", "RFI", "ADG", "SC",
    "LEA", "S1", "S2", "S3", "SS",
];

/// Grader score columns.
pub const GRADER_KEYS: [&str; 3] = ["S1", "S2", "S3"];

/// Productivity and carcass metrics measured at the end of the feeding trial.
pub const PRODUCTIVITY_KEYS: [&str; 6] = ["FW", "DMI", "RFI", "ADG", "SC", "LEA"];

/// Canonical (uppercase) name of a measurement column.
///
/// Input is trimmed, uppercased and stripped of trailing `*` markers, so
/// `fw*`, `FW*` and `FW` all name the same column.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MeasurementKey(String);

impl MeasurementKey {
    pub fn new(raw: &str) -> Result<Self> {
        let trimmed = raw.trim().trim_end_matches('*');
        if trimmed.is_empty()
            || !trimmed
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            return Err(Error::InvalidKey(raw.to_string()));
        }
        Ok(MeasurementKey(trimmed.to_ascii_uppercase()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Whether this is one of the [`STANDARD_KEYS`].
    pub fn is_standard(&self) -> bool {
        STANDARD_KEYS.contains(&self.0.as_str())
    }

    pub(crate) fn known(name: &'static str) -> Self {
        MeasurementKey(name.to_string())
    }
}

impl fmt::Display for MeasurementKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for MeasurementKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MeasurementKey::new(s)
    }
}

impl TryFrom<String> for MeasurementKey {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        MeasurementKey::new(&s)
    }
}

impl From<MeasurementKey> for String {
    fn from(k: MeasurementKey) -> String {
        k.0
    }
}

/// Parse a list of keys, e.g. from a comma-separated command-line value.
pub fn parse_keys<S: AsRef<str>>(items: &[S]) -> Result<Vec<MeasurementKey>> {
    items
        .iter()
        .map(|s| MeasurementKey::new(s.as_ref()))
        .collect()
}

/// Where a column's values came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Supplied,
    AveragedFromReplicates,
    Derived,
}

/// Rectangular table of animals (rows) by measurements (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct HerdTable {
    animal_ids: Vec<String>,
    keys: Vec<MeasurementKey>,
    columns: Vec<Vec<f64>>,
    provenance: Vec<Provenance>,
}

impl HerdTable {
    /// Build a table from supplied columns.
    ///
    /// Validates ids and keys for uniqueness, column lengths and finiteness,
    /// then derives `SS` when the grader columns are present.
    pub fn from_columns(
        animal_ids: Vec<String>,
        columns: Vec<(MeasurementKey, Vec<f64>)>,
    ) -> Result<Self> {
        Self::with_provenance(
            animal_ids,
            columns
                .into_iter()
                .map(|(k, v)| (k, v, Provenance::Supplied))
                .collect(),
        )
    }

    fn with_provenance(
        animal_ids: Vec<String>,
        columns: Vec<(MeasurementKey, Vec<f64>, Provenance)>,
    ) -> Result<Self> {
        if animal_ids.is_empty() || columns.is_empty() {
            return Err(Error::EmptyTable);
        }
        for (i, id) in animal_ids.iter().enumerate() {
            if animal_ids[..i].contains(id) {
                return Err(Error::DuplicateAnimal {
                    id: id.clone(),
                    line: i as u64 + 2,
                });
            }
        }
        let mut table = HerdTable {
            animal_ids,
            keys: Vec::with_capacity(columns.len() + 1),
            columns: Vec::with_capacity(columns.len() + 1),
            provenance: Vec::with_capacity(columns.len() + 1),
        };
        for (key, values, prov) in columns {
            if table.keys.contains(&key) {
                return Err(Error::DuplicateColumn(key.to_string()));
            }
            if values.len() != table.animal_ids.len() {
                return Err(Error::LengthMismatch {
                    left: table.animal_ids.len(),
                    right: values.len(),
                });
            }
            if let Some(row) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    column: key.to_string(),
                    line: row as u64 + 2,
                });
            }
            table.keys.push(key);
            table.columns.push(values);
            table.provenance.push(prov);
        }
        table.derive_structure_score()?;
        Ok(table)
    }

    fn derive_structure_score(&mut self) -> Result<()> {
        let graders: Vec<usize> = GRADER_KEYS
            .iter()
            .filter_map(|g| self.index_of(g))
            .collect();
        if graders.len() < GRADER_KEYS.len() {
            return Ok(());
        }
        if self.index_of("SS").is_some() {
            return Err(Error::DerivedColumnSupplied);
        }
        let ss = (0..self.n_animals())
            .map(|row| graders.iter().map(|&c| self.columns[c][row]).sum::<f64>() / 3.0)
            .collect();
        self.keys.push(MeasurementKey::known("SS"));
        self.columns.push(ss);
        self.provenance.push(Provenance::Derived);
        Ok(())
    }

    fn index_of(&self, key: &str) -> Option<usize> {
        self.keys.iter().position(|k| k.as_str() == key)
    }

    pub fn n_animals(&self) -> usize {
        self.animal_ids.len()
    }

    pub fn animal_ids(&self) -> &[String] {
        &self.animal_ids
    }

    /// Column keys in table order (the canonical order for tie-breaking).
    pub fn keys(&self) -> &[MeasurementKey] {
        &self.keys
    }

    pub fn contains(&self, key: &MeasurementKey) -> bool {
        self.index_of(key.as_str()).is_some()
    }

    pub fn column(&self, key: &MeasurementKey) -> Result<&[f64]> {
        self.index_of(key.as_str())
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::UnknownKey(key.to_string()))
    }

    pub fn provenance(&self, key: &MeasurementKey) -> Result<Provenance> {
        self.index_of(key.as_str())
            .map(|i| self.provenance[i])
            .ok_or_else(|| Error::UnknownKey(key.to_string()))
    }

    /// Row-major copy of the requested columns, one row per animal.
    pub fn rows(&self, keys: &[MeasurementKey]) -> Result<Vec<Vec<f64>>> {
        let cols = keys
            .iter()
            .map(|k| self.column(k))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..self.n_animals())
            .map(|r| cols.iter().map(|c| c[r]).collect())
            .collect())
    }
}

/// Load a wide CSV table (header row, first column animal id).
///
/// `schema`, when given, lists keys that must be present; other columns are
/// kept as user-defined keys.
pub fn load_table(path: impl AsRef<Path>, schema: Option<&[MeasurementKey]>) -> Result<HerdTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_table(file, schema)
}

/// Same as [`load_table`] over any reader.
pub fn read_table<R: Read>(reader: R, schema: Option<&[MeasurementKey]>) -> Result<HerdTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.len() < 2 {
        return Err(Error::EmptyTable);
    }
    let keys = header
        .iter()
        .skip(1)
        .map(MeasurementKey::new)
        .collect::<Result<Vec<_>>>()?;
    for (i, k) in keys.iter().enumerate() {
        if keys[..i].contains(k) {
            return Err(Error::DuplicateColumn(k.to_string()));
        }
    }

    let mut ids = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); keys.len()];
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                line,
                expected: header.len(),
                found: record.len(),
            });
        }
        let id = record[0].to_string();
        if id.is_empty() {
            return Err(Error::MissingCell {
                column: header[0].to_string(),
                line,
            });
        }
        if ids.contains(&id) {
            return Err(Error::DuplicateAnimal { id, line });
        }
        for (col, (cell, key)) in record.iter().skip(1).zip(&keys).enumerate() {
            if cell.is_empty() {
                return Err(Error::MissingCell {
                    column: key.to_string(),
                    line,
                });
            }
            let value: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                column: key.to_string(),
                line,
                value: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    column: key.to_string(),
                    line,
                });
            }
            columns[col].push(value);
        }
        ids.push(id);
    }
    if ids.is_empty() {
        return Err(Error::EmptyTable);
    }
    let table = HerdTable::from_columns(ids, keys.into_iter().zip(columns).collect())?;
    if let Some(required) = schema {
        if let Some(missing) = required.iter().find(|k| !table.contains(k)) {
            return Err(Error::UnknownKey(missing.to_string()));
        }
    }
    Ok(table)
}

/// One long-format replicate observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRow {
    pub animal_id: String,
    pub key: MeasurementKey,
    pub value: f64,
    pub source: String,
}

/// Long-format table with possibly several rows per (animal, key).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplicateTable {
    pub rows: Vec<ReplicateRow>,
}

/// Load a replicate CSV with the fixed header `animal_id,key,value,source`.
pub fn load_replicates(path: impl AsRef<Path>) -> Result<ReplicateTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_replicates(file)
}

pub fn read_replicates<R: Read>(reader: R) -> Result<ReplicateTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let expected = ["animal_id", "key", "value", "source"];
    if header.len() != expected.len() || header.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(Error::ReplicateHeader(
            header.iter().collect::<Vec<_>>().join(","),
        ));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let key = MeasurementKey::new(&record[1])?;
        let cell = &record[2];
        if cell.is_empty() {
            return Err(Error::MissingCell {
                column: key.to_string(),
                line,
            });
        }
        let value: f64 = cell.parse().map_err(|_| Error::NonNumeric {
            column: key.to_string(),
            line,
            value: cell.to_string(),
        })?;
        if !value.is_finite() {
            return Err(Error::NonFinite {
                column: key.to_string(),
                line,
            });
        }
        rows.push(ReplicateRow {
            animal_id: record[0].to_string(),
            key,
            value,
            source: record[3].to_string(),
        });
    }
    Ok(ReplicateTable { rows })
}

/// Average each (animal, key) replicate group into one cell.
///
/// Animals and keys keep their order of first appearance. Every animal
/// must cover the same set of keys.
pub fn collapse_replicates(reps: &ReplicateTable) -> Result<HerdTable> {
    if reps.rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    let mut ids: Vec<&str> = Vec::new();
    let mut keys: Vec<&MeasurementKey> = Vec::new();
    for row in &reps.rows {
        if !ids.contains(&row.animal_id.as_str()) {
            ids.push(&row.animal_id);
        }
        if !keys.contains(&&row.key) {
            keys.push(&row.key);
        }
    }
    // sums[key][animal] = (total, count)
    let mut sums = vec![vec![(0.0_f64, 0_usize); ids.len()]; keys.len()];
    for row in &reps.rows {
        let a = ids.iter().position(|id| *id == row.animal_id).unwrap();
        let k = keys.iter().position(|k| **k == row.key).unwrap();
        sums[k][a].0 += row.value;
        sums[k][a].1 += 1;
    }
    let mut columns = Vec::with_capacity(keys.len());
    for (k, key) in keys.iter().enumerate() {
        let mut values = Vec::with_capacity(ids.len());
        for (a, id) in ids.iter().enumerate() {
            let (total, count) = sums[k][a];
            if count == 0 {
                return Err(Error::RaggedReplicates {
                    animal: id.to_string(),
                    key: key.to_string(),
                });
            }
            values.push(total / count as f64);
        }
        columns.push(((*key).clone(), values, Provenance::AveragedFromReplicates));
    }
    HerdTable::with_provenance(ids.into_iter().map(String::from).collect(), columns)
}

/// Per-animal agreement between the three graders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub animal_id: String,
    pub scores: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation across graders.
    pub std: f64,
}

/// Mean and sample standard deviation of `S1..S3` for each animal.
pub fn aggregate_scores(table: &HerdTable) -> Result<Vec<ScoreSummary>> {
    let graders = GRADER_KEYS
        .iter()
        .map(|g| table.column(&MeasurementKey::known(g)))
        .collect::<Result<Vec<_>>>()?;
    Ok(table
        .animal_ids()
        .iter()
        .enumerate()
        .map(|(row, id)| {
            let scores: Vec<f64> = graders.iter().map(|c| c[row]).collect();
            ScoreSummary {
                animal_id: id.clone(),
                mean: mean(&scores),
                std: sample_std(&scores),
                scores,
            }
        })
        .collect())
}

/// One row of a descriptive-statistics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub key: MeasurementKey,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single observation.
    pub std: f64,
    pub min: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub max: f64,
}

/// Summary statistics of one column. Quartiles interpolate linearly between
/// order statistics at position `(n - 1) p`.
pub fn describe(table: &HerdTable, key: &MeasurementKey) -> Result<DescriptiveStats> {
    let values = table.column(key)?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(DescriptiveStats {
        key: key.clone(),
        n: values.len(),
        mean: mean(values),
        std: sample_std(values),
        min: sorted[0],
        q25: quantile_sorted(&sorted, 0.25),
        q50: quantile_sorted(&sorted, 0.5),
        q75: quantile_sorted(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    })
}

/// [`describe`] for every column in table order.
pub fn describe_all(table: &HerdTable) -> Vec<DescriptiveStats> {
    table
        .keys()
        .iter()
        .map(|k| describe(table, k).expect("key taken from the table"))
        .collect()
}

/// Write descriptive statistics as CSV (`key,n,mean,std,min,q25,q50,q75,max`).
pub fn write_stats_csv<W: std::io::Write>(stats: &[DescriptiveStats], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for row in stats {
        wtr.serialize(row)?;
    }
    wtr.flush().map_err(|e| Error::io("<stats csv>", e))?;
    Ok(())
}
