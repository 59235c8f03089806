//! Tabular sweep output and its CSV/JSON encodings.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::{Map, Number, Value};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Float)
    }
}

/// Floats print in their shortest round-trip form; magnitudes below 1e-4
/// switch to scientific notation.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

impl Cell {
    fn to_csv_field(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Float(x) => Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Int(i) => Value::Number((*i).into()),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Float(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            _ => None,
        }
    }
}

/// Rows under a fixed header.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Dataset {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    /// Panics when the row width differs from the header.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of one column; non-numeric cells are skipped.
    pub fn float_column(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.column_index(name) else { return Vec::new() };
        self.rows.iter().filter_map(|r| r[i].as_f64()).collect()
    }

    /// Stacks labelled datasets under a leading `series` column. The header
    /// is the union of the parts' columns in first-seen order; missing cells
    /// are empty.
    pub fn stack(parts: Vec<(String, Dataset)>) -> Dataset {
        let mut columns = vec!["series".to_string()];
        for (_, part) in &parts {
            for c in &part.columns {
                if !columns.contains(c) {
                    columns.push(c.clone());
                }
            }
        }
        let mut out = Dataset::new(columns.clone());
        for (label, part) in parts {
            let map: Vec<Option<usize>> = columns[1..].iter().map(|c| part.column_index(c)).collect();
            for row in part.rows {
                let mut cells = vec![Cell::Text(label.clone())];
                cells.extend(map.iter().map(|idx| idx.map_or(Cell::Empty, |i| row[i].clone())));
                out.rows.push(cells);
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> CliResult<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        let encode = |e: csv::Error| CliError::Encode(e.to_string());
        w.write_record(&self.columns).map_err(encode)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv_field)).map_err(encode)?;
        }
        w.flush().map_err(|e| CliError::Encode(e.to_string()))
    }

    pub fn to_csv_string(&self) -> CliResult<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| CliError::Encode(e.to_string()))
    }

    pub fn to_json_value(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        self.columns.iter().cloned().zip(row.iter().map(Cell::to_json)).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn to_json_string(&self) -> CliResult<String> {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).map_err(|e| CliError::Encode(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Writes `dataset` to `path`, or to standard output when `path` is `None`.
pub fn emit(dataset: &Dataset, format: OutputFormat, path: Option<&Path>) -> CliResult<()> {
    let text = match format {
        OutputFormat::Csv => dataset.to_csv_string()?,
        OutputFormat::Json => dataset.to_json_string()?,
    };
    match path {
        Some(p) => {
            let io = |source| CliError::Io { path: p.to_path_buf(), source };
            let mut f = BufWriter::new(File::create(p).map_err(io)?);
            f.write_all(text.as_bytes()).map_err(io)?;
            f.flush().map_err(io)
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting() {
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(1e-5), "1e-5");
        assert_eq!(format_float(-2.5e-7), "-2.5e-7");
        assert_eq!(format_float(1e-4), "0.0001");
        for x in [0.1 + 0.2, 1.0 / 3.0, 2.220446049250313e-16, 123456.789, -9.87654321e-12] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn empty_dataset_is_header_only() {
        let d = Dataset::new(["distance_km", "rate"]);
        assert_eq!(d.to_csv_string().unwrap(), "distance_km,rate\n");
        assert_eq!(d.to_json_string().unwrap(), "[]\n");
    }

    #[test]
    fn quoting_and_json_round_trip() {
        let mut d = Dataset::new(["series", "rate", "n", "note"]);
        d.push(vec!["a,b".into(), 1.0f64.into(), 3usize.into(), Cell::Empty]);
        d.push(vec!["c\"d".into(), f64::NAN.into(), 4usize.into(), Cell::Empty]);
        let csv = d.to_csv_string().unwrap();
        assert!(csv.contains("\"a,b\""));
        assert!(csv.contains("\"c\"\"d\""));
        let parsed: Value = serde_json::from_str(&d.to_json_string().unwrap()).unwrap();
        assert_eq!(parsed[0]["rate"], Value::from(1.0));
        assert_eq!(parsed[0]["n"], Value::from(3));
        assert!(parsed[1]["rate"].is_null());
        assert!(parsed[1]["note"].is_null());
        let keys: Vec<&String> = parsed[0].as_object().unwrap().keys().collect();
        assert_eq!(keys, ["series", "rate", "n", "note"]);
    }

    #[test]
    fn stacking_unions_columns() {
        let mut a = Dataset::new(["distance_km", "rate"]);
        a.push(vec![0.0.into(), 1.0.into()]);
        let mut b = Dataset::new(["distance_km", "fidelity"]);
        b.push(vec![5.0.into(), 0.9.into()]);
        let s = Dataset::stack(vec![("a".into(), a), ("b".into(), b)]);
        assert_eq!(s.columns(), ["series", "distance_km", "rate", "fidelity"]);
        assert_eq!(s.rows()[0][3], Cell::Empty);
        assert_eq!(s.rows()[1][2], Cell::Empty);
    }
}
