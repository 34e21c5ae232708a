//! Reading datasets and measures, writing synthetic data and reports.
//!
//! CSV files have no header, use `.` as the decimal separator and may contain
//! `#` comment lines. Rows are numbered from 1 in error messages.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{WeightedMeasure, PROBABILITY_TOLERANCE};
use crate::space::{FiniteMetricSpace, Metric};
use crate::synth::{Dataset, SyntheticDataset};

/// Version of the JSON provenance and report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// `.json` means JSON, anything else CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// What the rows of an input file describe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    /// One point of `[0,1]^d` per row.
    Coordinates,
    /// Row `i` holds the distances from point `i` to every point.
    DistanceMatrix,
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read_rows(path: &Path, format: Format) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let rows = match format {
        Format::Csv => parse_csv(&text)?,
        Format::Json => parse_json(&text)?,
    };
    if rows.is_empty() {
        return Err(Error::input(None, format!("{} contains no rows", path.display())));
    }
    Ok(rows)
}

fn parse_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let row = e.position().map(|p| p.line() as usize);
            Error::input(row, e.to_string())
        })?;
        let row = record.position().map(|p| p.line() as usize);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let values = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|_| Error::input(row, format!("cannot parse {field:?} as a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((row, values));
    }
    check_rows(rows)
}

fn parse_json(text: &str) -> Result<Vec<Vec<f64>>> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::input(Some(e.line()), e.to_string()))?;
    let value = match value {
        serde_json::Value::Object(mut map) => map
            .remove("points")
            .or_else(|| map.remove("distances"))
            .ok_or_else(|| Error::input(None, "expected a \"points\" or \"distances\" array"))?,
        other => other,
    };
    let serde_json::Value::Array(items) = value else {
        return Err(Error::input(None, "expected an array of rows"));
    };
    let mut rows = Vec::new();
    for (i, item) in items.into_iter().enumerate() {
        let row = Some(i + 1);
        let values = match item {
            serde_json::Value::Array(xs) => xs
                .into_iter()
                .map(|x| x.as_f64().ok_or_else(|| Error::input(row, format!("{x} is not a number"))))
                .collect::<Result<Vec<f64>>>()?,
            serde_json::Value::Number(x) => vec![x.as_f64().unwrap_or(f64::NAN)],
            other => return Err(Error::input(row, format!("{other} is not a row"))),
        };
        rows.push((row, values));
    }
    check_rows(rows)
}

fn check_rows(rows: Vec<(Option<usize>, Vec<f64>)>) -> Result<Vec<Vec<f64>>> {
    let width = rows.first().map_or(0, |r| r.1.len());
    let mut out = Vec::with_capacity(rows.len());
    for (row, values) in rows {
        if values.len() != width {
            return Err(Error::input(row, format!("expected {width} values, found {}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::input(row, "non-finite value"));
        }
        out.push(values);
    }
    Ok(out)
}

fn check_unit_cube(rows: &[Vec<f64>]) -> Result<()> {
    for (i, r) in rows.iter().enumerate() {
        if let Some(v) = r.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::input(Some(i + 1), format!("coordinate {v} outside [0, 1]")));
        }
    }
    Ok(())
}

/// Loads a dataset. Coordinates must lie in `[0,1]^d` (and have `dim`
/// columns when given); each row becomes one point of the returned space.
pub fn ingest(path: &Path, format: Format, kind: InputKind, dim: Option<usize>, metric: Metric) -> Result<Dataset> {
    let rows = read_rows(path, format)?;
    let n = rows.len();
    let space = match kind {
        InputKind::Coordinates => {
            let width = rows[0].len();
            if let Some(d) = dim {
                if d != width {
                    return Err(Error::input(Some(1), format!("expected {d} coordinates, found {width}")));
                }
            }
            check_unit_cube(&rows)?;
            FiniteMetricSpace::with_coords(width, rows.concat(), metric)?
        }
        InputKind::DistanceMatrix => {
            if rows[0].len() != n {
                return Err(Error::input(Some(1), format!("matrix has {n} rows but {} columns", rows[0].len())));
            }
            FiniteMetricSpace::from_matrix(n, rows.concat())?
        }
    };
    Dataset::new(Arc::new(space), (0..n).collect())
}

/// Loads a weighted point set: every row is `x_1, ..., x_d, weight` with the
/// coordinates in `[0,1]^d` and weights forming a probability vector.
pub fn read_measure(path: &Path, format: Format, metric: Metric) -> Result<WeightedMeasure> {
    let rows = read_rows(path, format)?;
    let width = rows[0].len();
    if width < 2 {
        return Err(Error::input(Some(1), "rows need at least one coordinate and a weight"));
    }
    let coords: Vec<Vec<f64>> = rows.iter().map(|r| r[..width - 1].to_vec()).collect();
    check_unit_cube(&coords)?;
    let weights: Vec<f64> = rows.iter().map(|r| r[width - 1]).collect();
    if let Some(i) = weights.iter().position(|w| *w < 0.0) {
        return Err(Error::input(Some(i + 1), "negative weight"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
        return Err(Error::input(None, format!("weights sum to {total}, not 1")));
    }
    let space = Arc::new(FiniteMetricSpace::with_coords(width - 1, coords.concat(), metric)?);
    WeightedMeasure::from_dense(space, weights)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn point_fields(space: &FiniteMetricSpace, p: usize) -> Vec<String> {
    match space.coord(p) {
        Some(c) => c.iter().map(|x| x.to_string()).collect(),
        None => vec![p.to_string()],
    }
}

fn to_csv(rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for row in rows {
        writer.write_record(&row).map_err(|e| Error::Serialization(e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
}

/// One row per synthetic point: its coordinates, or its index for spaces
/// given by a distance matrix.
pub fn write_synthetic_csv(path: &Path, data: &SyntheticDataset) -> Result<()> {
    let text = to_csv(data.points.iter().map(|&p| point_fields(&data.space, p)))?;
    write_text(path, &text)
}

/// One row per atom: coordinates (or index) followed by the weight.
pub fn write_measure_csv(path: &Path, measure: &WeightedMeasure) -> Result<()> {
    let text = to_csv(measure.iter().map(|(p, w)| {
        let mut fields = point_fields(measure.space(), p);
        fields.push(w.to_string());
        fields
    }))?;
    write_text(path, &text)
}

/// Report rows as CSV with a header line taken from the field names.
pub fn write_table_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).map_err(|e| Error::Serialization(e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
    fs::write(path, bytes).map_err(|e| io_error(path, e))
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Serialization(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}
