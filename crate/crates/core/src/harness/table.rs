use std::io::Write;
use std::path::Path;

use serde::ser::{Serialize, Serializer};
use serde_json::{Map, Value};

use super::OutputFormat;
use crate::error::Result;

/// One table cell. Numbers are rounded to 12 significant digits and printed
/// with the same shortest round-trip form in CSV and JSON, so both formats
/// carry identical values.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    /// Undefined value: `NA` in CSV, `null` in JSON.
    Na,
}

impl Cell {
    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => Value::from(round_sig12(*x)),
            Cell::Num(x) => Value::String(non_finite_token(*x).to_string()),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Na => Value::Null,
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => Value::from(round_sig12(*x)).to_string(),
            Cell::Num(x) => non_finite_token(*x).to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Na => "NA".to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(i: u64) -> Self {
        Cell::Int(i)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as u64)
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.json().serialize(s)
    }
}

pub(crate) fn round_sig12(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn non_finite_token(x: f64) -> &'static str {
    if x.is_nan() {
        "nan"
    } else if x > 0.0 {
        "inf"
    } else {
        "-inf"
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    /// Cell by row index and column name.
    pub fn get(&self, row: usize, column: &str) -> Option<&Cell> {
        let c = self.columns.iter().position(|x| x == column)?;
        self.rows.get(row).map(|r| &r[c])
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json_value(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .cloned()
                        .zip(row.iter().map(Cell::json))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json_value())?;
                s.push('\n');
                Ok(s)
            }
        }
    }

    /// Writes to `path` atomically, or to stdout when `path` is `None`.
    pub fn write(&self, format: OutputFormat, path: Option<&Path>) -> Result<()> {
        let text = self.render(format)?;
        match path {
            Some(p) => write_atomic(p, text.as_bytes()),
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

fn csv_err(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e.to_string())
}

/// Writes through a temporary file in the destination directory and renames
/// it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["x", "n", "note", "se"]);
        t.push(vec![Cell::Num(0.030_896_135_351_457_5), Cell::Int(3), Cell::Text("a,b".into()), Cell::Na]);
        t.push(vec![Cell::Num(f64::NEG_INFINITY), Cell::Int(0), Cell::Text(String::new()), Cell::Num(1e-300)]);
        t
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,n,note,se");
        assert_eq!(lines[1], "0.0308961353515,3,\"a,b\",NA");
        assert_eq!(lines[2], "-inf,0,,1e-300");
    }

    #[test]
    fn json_matches_csv_values() {
        let t = sample();
        let json = t.to_json_value();
        let csv = t.to_csv().unwrap();
        let mut reader = csv::Reader::from_reader(csv.as_bytes());
        for (rec, obj) in reader.records().zip(json.as_array().unwrap()) {
            let rec = rec.unwrap();
            for (i, col) in t.columns.iter().enumerate() {
                let j = &obj[col];
                let c = &rec[i];
                match j {
                    Value::Number(n) => assert_eq!(n.as_f64().unwrap(), c.parse::<f64>().unwrap()),
                    Value::String(s) => assert_eq!(s, c),
                    Value::Null => assert_eq!(c, "NA"),
                    _ => unreachable!(),
                }
            }
        }
    }

    #[test]
    fn rounding_to_twelve_digits() {
        assert_eq!(round_sig12(0.123_456_789_012_345), 0.123_456_789_012);
        assert_eq!(round_sig12(0.0), 0.0);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
    }
}
