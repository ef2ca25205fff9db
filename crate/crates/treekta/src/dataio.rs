//! CSV ingestion and export for real-life datasets.
//!
//! A [`DatasetSchema`] names the target column, optionally restricts the
//! feature columns, and decides what happens on missing values. Schemas are
//! plain JSON so they can live in sidecar files next to the data.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Mat;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnSelector {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NaPolicy {
    /// Silently drop rows containing missing cells.
    #[default]
    DropRow,
    /// Fail with the first missing cell's location.
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub target_column: ColumnSelector,
    /// `None` means every non-target column is a feature.
    #[serde(default)]
    pub feature_columns: Option<Vec<ColumnSelector>>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    #[serde(default = "default_true")]
    pub has_header: bool,
    #[serde(default)]
    pub na_policy: NaPolicy,
}

fn default_delimiter() -> char {
    ','
}

fn default_true() -> bool {
    true
}

impl DatasetSchema {
    /// Target in the last column, all other columns features, header row.
    pub fn target_last(n_columns: usize) -> Self {
        DatasetSchema {
            target_column: ColumnSelector::Index(n_columns - 1),
            feature_columns: None,
            delimiter: ',',
            has_header: true,
            na_policy: NaPolicy::DropRow,
        }
    }

    pub fn target_named(name: &str) -> Self {
        DatasetSchema {
            target_column: ColumnSelector::Name(name.to_string()),
            feature_columns: None,
            delimiter: ',',
            has_header: true,
            na_policy: NaPolicy::DropRow,
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "NA" | "na" | "N/A" | "n/a" | "?" | "NaN" | "nan" | "null")
}

fn resolve(selector: &ColumnSelector, headers: Option<&[String]>, width: usize) -> Result<usize> {
    match selector {
        ColumnSelector::Index(i) => {
            if *i >= width {
                Err(Error::CsvFormat(format!(
                    "column index {} out of range ({} columns)",
                    i, width
                )))
            } else {
                Ok(*i)
            }
        }
        ColumnSelector::Name(name) => {
            let headers = headers.ok_or_else(|| {
                Error::CsvFormat(format!(
                    "column '{}' referenced by name but the file has no header",
                    name
                ))
            })?;
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::CsvFormat(format!("no column named '{}'", name)))
        }
    }
}

/// Parses a numeric CSV into a dataset per the schema.
pub fn load_csv(path: &Path, schema: &DatasetSchema) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter as u8)
        .has_headers(schema.has_header)
        .flexible(false)
        .from_path(path)
        .map_err(|e| Error::CsvFormat(e.to_string()))?;

    let headers: Option<Vec<String>> = if schema.has_header {
        Some(
            reader
                .headers()
                .map_err(|e| Error::CsvFormat(e.to_string()))?
                .iter()
                .map(str::to_string)
                .collect(),
        )
    } else {
        None
    };

    let mut records = reader.records();
    let first = match records.next() {
        Some(r) => r.map_err(|e| Error::CsvFormat(e.to_string()))?,
        None => return Err(Error::CsvFormat("file has no data rows".into())),
    };
    let width = first.len();

    let target_idx = resolve(&schema.target_column, headers.as_deref(), width)?;
    let feature_idx: Vec<usize> = match &schema.feature_columns {
        Some(cols) => {
            let idx: Vec<usize> = cols
                .iter()
                .map(|c| resolve(c, headers.as_deref(), width))
                .collect::<Result<_>>()?;
            if idx.contains(&target_idx) {
                return Err(Error::CsvFormat(
                    "target column listed among feature columns".into(),
                ));
            }
            idx
        }
        None => (0..width).filter(|&i| i != target_idx).collect(),
    };
    if feature_idx.is_empty() {
        return Err(Error::NoFeatures);
    }

    let header_offset = if schema.has_header { 1 } else { 0 };
    let mut features: Vec<f64> = Vec::new();
    let mut targets: Vec<f64> = Vec::new();
    let mut row_buf: Vec<f64> = Vec::with_capacity(feature_idx.len());

    let mut process = |record: &csv::StringRecord, record_no: usize| -> Result<()> {
        if record.len() != width {
            return Err(Error::CsvFormat(format!(
                "row {} has {} columns, expected {}",
                record_no,
                record.len(),
                width
            )));
        }
        row_buf.clear();
        let mut cells = feature_idx.iter().map(|&c| (c, record.get(c).unwrap_or("")));
        let mut dropped = false;
        let target_cell = record.get(target_idx).unwrap_or("");
        for (c, cell) in cells.by_ref().chain(std::iter::once((target_idx, target_cell))) {
            let cell = cell.trim();
            if is_missing(cell) {
                match schema.na_policy {
                    NaPolicy::DropRow => {
                        dropped = true;
                        break;
                    }
                    NaPolicy::Error => {
                        return Err(Error::CsvParse {
                            row: record_no,
                            col: c + 1,
                            message: "missing value".into(),
                        })
                    }
                }
            }
            let value: f64 = cell.parse().map_err(|_| Error::CsvParse {
                row: record_no,
                col: c + 1,
                message: format!("cannot parse '{}' as a number", cell),
            })?;
            if c == target_idx {
                targets.push(value);
            } else {
                row_buf.push(value);
            }
        }
        if !dropped {
            features.extend_from_slice(&row_buf);
        }
        Ok(())
    };

    process(&first, header_offset + 1)?;
    for (i, record) in records.enumerate() {
        let record = record.map_err(|e| Error::CsvFormat(e.to_string()))?;
        process(&record, header_offset + i + 2)?;
    }

    if targets.is_empty() {
        return Err(Error::CsvFormat("no usable rows after NA handling".into()));
    }
    let p = feature_idx.len();
    Dataset::new(Mat::from_vec(targets.len(), p, features)?, targets)
}

/// CSV text with header x1..xp,y. Shortest round-trip float formatting, so
/// load(save(d)) == d.
pub fn to_csv_string(data: &Dataset) -> String {
    let mut out = String::new();
    for j in 0..data.p() {
        out.push_str(&format!("x{},", j + 1));
    }
    out.push_str("y\n");
    for i in 0..data.n() {
        for v in data.row(i) {
            out.push_str(&v.to_string());
            out.push(',');
        }
        out.push_str(&data.y()[i].to_string());
        out.push('\n');
    }
    out
}

pub fn save_csv(data: &Dataset, path: &Path) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(to_csv_string(data).as_bytes())?;
    Ok(())
}

/// Uniform subsample of `n_sub` rows without replacement.
pub fn subsample(data: &Dataset, n_sub: usize, rng: &mut ChaCha8Rng) -> Result<Dataset> {
    if n_sub > data.n() {
        return Err(Error::InvalidConfig(format!(
            "cannot subsample {} rows from {}",
            n_sub,
            data.n()
        )));
    }
    if n_sub == 0 {
        return Err(Error::InvalidConfig("subsample size must be >= 1".into()));
    }
    let rows = rand::seq::index::sample(rng, data.n(), n_sub).into_vec();
    Ok(data.select_rows(&rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;

    fn write_tmp(content: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        fs::write(&path, content).unwrap();
        (dir, path)
    }

    #[test]
    fn numeric_file_target_last() {
        let (_d, path) = write_tmp("a,b,y\n1,2,3\n4,5,6\n7,8,9\n");
        let data = load_csv(&path, &DatasetSchema::target_last(3)).unwrap();
        assert_eq!((data.n(), data.p()), (3, 2));
        assert_eq!(data.row(1), &[4.0, 5.0]);
        assert_eq!(data.y(), &[3.0, 6.0, 9.0]);
    }

    #[test]
    fn target_by_name_and_explicit_features() {
        let (_d, path) = write_tmp("a,b,y\n1,2,3\n4,5,6\n");
        let schema = DatasetSchema {
            target_column: ColumnSelector::Name("y".into()),
            feature_columns: Some(vec![ColumnSelector::Name("b".into())]),
            delimiter: ',',
            has_header: true,
            na_policy: NaPolicy::Error,
        };
        let data = load_csv(&path, &schema).unwrap();
        assert_eq!((data.n(), data.p()), (2, 1));
        assert_eq!(data.row(0), &[2.0]);
    }

    #[test]
    fn na_drop_row_shrinks_n() {
        let (_d, path) = write_tmp("a,y\n1,2\nNA,4\n5,6\n");
        let data = load_csv(&path, &DatasetSchema::target_last(2)).unwrap();
        assert_eq!(data.n(), 2);
        assert_eq!(data.y(), &[2.0, 6.0]);
    }

    #[test]
    fn na_error_policy_reports_location() {
        let (_d, path) = write_tmp("a,y\n1,2\n?,4\n");
        let schema = DatasetSchema {
            na_policy: NaPolicy::Error,
            ..DatasetSchema::target_last(2)
        };
        match load_csv(&path, &schema) {
            Err(Error::CsvParse { row, col, .. }) => {
                assert_eq!((row, col), (3, 1));
            }
            other => panic!("expected parse error, got {:?}", other),
        }
    }

    #[test]
    fn unparseable_cell_reports_location() {
        let (_d, path) = write_tmp("a,y\n1,2\n4,oops\n");
        match load_csv(&path, &DatasetSchema::target_last(2)) {
            Err(Error::CsvParse { row, col, message }) => {
                assert_eq!((row, col), (3, 2));
                assert!(message.contains("oops"));
            }
            other => panic!("expected parse error, got {:?}", other),
        }
    }

    #[test]
    fn target_among_features_rejected() {
        let (_d, path) = write_tmp("a,y\n1,2\n");
        let schema = DatasetSchema {
            feature_columns: Some(vec![ColumnSelector::Index(1)]),
            ..DatasetSchema::target_last(2)
        };
        assert!(matches!(load_csv(&path, &schema), Err(Error::CsvFormat(_))));
    }

    #[test]
    fn save_load_round_trip_is_exact() {
        let spec = crate::simgen::ScenarioSpec::new(
            crate::simgen::ScenarioFamily::Friedman,
            40,
            6,
            99,
        );
        let data = crate::simgen::generate(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("roundtrip.csv");
        save_csv(&data, &path).unwrap();
        let back = load_csv(&path, &DatasetSchema::target_last(7)).unwrap();
        assert_eq!(data, back);
    }

    #[test]
    fn subsample_permutes_and_is_seeded() {
        let spec = crate::simgen::ScenarioSpec::new(
            crate::simgen::ScenarioFamily::Meier1,
            30,
            4,
            1,
        );
        let data = crate::simgen::generate(&spec).unwrap();
        let a = subsample(&data, 30, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = subsample(&data, 30, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, data); // permuted with overwhelming probability
        // same multiset of targets
        let mut ys = a.y().to_vec();
        let mut orig = data.y().to_vec();
        ys.sort_by(f64::total_cmp);
        orig.sort_by(f64::total_cmp);
        assert_eq!(ys, orig);

        let small = subsample(&data, 7, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(small.n(), 7);
        assert!(subsample(&data, 31, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn schema_json_round_trip() {
        let schema = DatasetSchema::target_named("medv");
        let json = serde_json::to_string(&schema).unwrap();
        let back: DatasetSchema = serde_json::from_str(&json).unwrap();
        assert_eq!(schema, back);
        // defaults fill in when fields are omitted
        let minimal: DatasetSchema =
            serde_json::from_str(r#"{"target_column": "y"}"#).unwrap();
        assert_eq!(minimal.delimiter, ',');
        assert!(minimal.has_header);
        assert_eq!(minimal.na_policy, NaPolicy::DropRow);
    }
}
