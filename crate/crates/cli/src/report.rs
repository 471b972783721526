//! Deterministic report assembly and serialization.
//!
//! JSON objects are `serde_json::Map`s, which keep keys sorted; floats are
//! rounded to 12 significant digits before serialization, so identical
//! inputs give identical bytes.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde_json::{Map, Number, Value};

use crate::error::CliError;

pub const UNITS: &str = "nats";

/// `git describe`-style version baked in at build time.
pub fn tool_version() -> &'static str {
    env!("GWEL_VERSION")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Round to 12 significant digits; non-finite values become `null`.
pub fn round12(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let r = if r == 0.0 { 0.0 } else { r };
    Number::from_f64(r).map_or(Value::Null, Value::Number)
}

/// Conversion of report cells.
pub trait Cell {
    fn cell(self) -> Value;
}

impl Cell for f64 {
    fn cell(self) -> Value {
        round12(self)
    }
}

impl Cell for bool {
    fn cell(self) -> Value {
        Value::Bool(self)
    }
}

impl Cell for &str {
    fn cell(self) -> Value {
        Value::String(self.to_string())
    }
}

impl Cell for String {
    fn cell(self) -> Value {
        Value::String(self)
    }
}

macro_rules! int_cell {
    ($($t:ty),*) => {$(
        impl Cell for $t {
            fn cell(self) -> Value {
                Value::from(self)
            }
        }
    )*};
}
int_cell!(u16, u32, u64, usize, i64);

impl<T: Cell> Cell for Option<T> {
    fn cell(self) -> Value {
        self.map_or(Value::Null, Cell::cell)
    }
}

/// Exact counts: a JSON number while it is exactly representable in a
/// double, a decimal string beyond that.
impl Cell for &BigUint {
    fn cell(self) -> Value {
        match self.to_u64() {
            Some(v) if v <= 1 << 53 => Value::from(v),
            _ => Value::String(self.to_string()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Series {
    pub fn new(columns: &[&str]) -> Self {
        Series {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub seed: u64,
    pub series: Series,
    pub summary: BTreeMap<String, Value>,
    /// Short provenance notes for summary entries.
    pub notes: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        Report {
            command: command.to_string(),
            params: BTreeMap::new(),
            seed,
            series: Series::default(),
            summary: BTreeMap::new(),
            notes: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Cell) -> &mut Self {
        self.params.insert(key.to_string(), value.cell());
        self
    }

    pub fn summary(&mut self, key: &str, value: impl Cell) -> &mut Self {
        self.summary.insert(key.to_string(), value.cell());
        self
    }

    pub fn note(&mut self, key: &str, text: &str) -> &mut Self {
        self.notes.insert(key.to_string(), text.to_string());
        self
    }

    pub fn to_value(&self) -> Value {
        let mut series = Map::new();
        series.insert("columns".into(), Value::from(self.series.columns.clone()));
        series.insert(
            "rows".into(),
            Value::Array(self.series.rows.iter().map(|r| Value::Array(r.clone())).collect()),
        );
        let mut root = Map::new();
        root.insert("command".into(), Value::from(self.command.clone()));
        root.insert(
            "params".into(),
            Value::Object(self.params.clone().into_iter().collect()),
        );
        root.insert("seed".into(), Value::from(self.seed));
        root.insert("series".into(), Value::Object(series));
        root.insert(
            "summary".into(),
            Value::Object(self.summary.clone().into_iter().collect()),
        );
        root.insert(
            "notes".into(),
            Value::Object(
                self.notes
                    .iter()
                    .map(|(k, v)| (k.clone(), Value::from(v.clone())))
                    .collect(),
            ),
        );
        root.insert("tool_version".into(), Value::from(tool_version()));
        root.insert("units".into(), Value::from(UNITS));
        root.insert("warnings".into(), Value::from(self.warnings.clone()));
        Value::Object(root)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("report serializes");
        s.push('\n');
        s
    }

    /// The series as CSV; reports without a series list their summary as
    /// `name,value` rows instead.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if self.series.columns.is_empty() {
            out.push_str("name,value\n");
            for (k, v) in &self.summary {
                out.push_str(&format!("{},{}\n", csv_field(&Value::from(k.clone())), csv_field(v)));
            }
            return out;
        }
        out.push_str(&self.series.columns.join(","));
        out.push('\n');
        for row in &self.series.rows {
            let fields: Vec<String> = row.iter().map(csv_field).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

fn csv_field(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Write rendered output to `out`, or to stdout.
pub fn write_output(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round12(0.5493061443340549).to_string(), "0.549306144334");
        assert_eq!(round12(1.0 / 3.0).to_string(), "0.333333333333");
        assert_eq!(round12(-0.0).to_string(), "0.0");
        assert_eq!(round12(f64::NAN), Value::Null);
        assert_eq!(round12(123456789.12345679).to_string(), "123456789.123");
    }

    #[test]
    fn json_keys_are_sorted() {
        let mut r = Report::new("walk-entropy", 7);
        r.param("steps", 3usize).param("rank", 2u16);
        r.summary("z", 1.0).summary("a", 2.0);
        let json = r.to_json();
        let keys = [
            "\"command\"",
            "\"notes\"",
            "\"params\"",
            "\"seed\"",
            "\"series\"",
            "\"summary\"",
            "\"tool_version\"",
            "\"units\"",
            "\"warnings\"",
        ];
        let pos: Vec<usize> = keys.iter().map(|k| json.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|p| p[0] < p[1]));
        assert!(json.find("\"rank\"").unwrap() < json.find("\"steps\"").unwrap());
        assert!(json.contains("\"units\": \"nats\""));
    }

    #[test]
    fn csv_layout() {
        let mut r = Report::new("walk-entropy", 7);
        r.series = Series::new(&["n", "H", "H_over_n", "increment"]);
        r.series
            .push(vec![0usize.cell(), 0.0.cell(), None::<f64>.cell(), None::<f64>.cell()]);
        r.series.push(vec![
            1usize.cell(),
            4f64.ln().cell(),
            4f64.ln().cell(),
            4f64.ln().cell(),
        ]);
        assert_eq!(
            r.to_csv(),
            "n,H,H_over_n,increment\n0,0.0,,\n1,1.38629436112,1.38629436112,1.38629436112\n"
        );
        let mut s = Report::new("drift", 7);
        s.summary("estimate", 0.5);
        assert_eq!(s.to_csv(), "name,value\nestimate,0.5\n");
    }

    #[test]
    fn big_counts_switch_to_strings() {
        assert_eq!((&BigUint::from(53u32)).cell(), Value::from(53u64));
        let big = BigUint::from(3u32).pow(40);
        assert_eq!((&big).cell(), Value::String(big.to_string()));
    }
}
