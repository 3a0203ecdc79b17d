//! Study reports and their JSON/CSV rendering.

use std::collections::BTreeMap;
use std::io::Write;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// One cell of a result row.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Null,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) if v.is_nan() => "nan".into(),
            Cell::Num(v) if v.is_infinite() => if *v > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Num(v) => format!("{v}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Null => String::new(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Num(v) => crate::serde_ext::f64(v, s),
            Cell::Int(v) => s.serialize_i64(*v),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Bool(b) => s.serialize_bool(*b),
            Cell::Null => s.serialize_none(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Null, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Ordered key/value record.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Row(pub Vec<(String, Cell)>);

impl Row {
    pub fn new() -> Self {
        Row::default()
    }

    pub fn with(mut self, key: &str, value: impl Into<Cell>) -> Self {
        self.0.push((key.to_string(), value.into()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Cell> {
        self.0.iter().find(|(k, _)| k == key).map(|e| &e.1)
    }

    pub fn num(&self, key: &str) -> Option<f64> {
        match self.get(key) {
            Some(Cell::Num(v)) => Some(*v),
            _ => None,
        }
    }
}

impl Serialize for Row {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Level {
    pub label: String,
    pub h: f64,
    pub extent: Vec<[f64; 2]>,
    #[serde(serialize_with = "crate::serde_ext::opt_f64")]
    pub value: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Stability {
    pub levels: Vec<Level>,
    /// Largest relative change from the base level, in percent.
    #[serde(serialize_with = "crate::serde_ext::opt_f64")]
    pub drift_pct: Option<f64>,
}

impl Stability {
    /// Fills `drift_pct` from the level values.
    pub fn from_levels(levels: Vec<Level>) -> Self {
        let drift_pct = levels.first().and_then(|l| l.value).map(|base| {
            levels[1..]
                .iter()
                .filter_map(|l| l.value)
                .map(|v| {
                    if v == base {
                        0.0
                    } else if base == 0.0 {
                        f64::INFINITY
                    } else {
                        100.0 * (v - base).abs() / base.abs()
                    }
                })
                .fold(0.0, f64::max)
        });
        Stability { levels, drift_pct }
    }
}

fn map_f64<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut out = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        out.serialize_entry(k, &Cell::Num(*v))?;
    }
    out.end()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StudyReport {
    pub config_echo: serde_json::Value,
    pub results: Vec<Row>,
    #[serde(serialize_with = "crate::serde_ext::opt_f64")]
    pub sup_ratio: Option<f64>,
    #[serde(rename = "fitted_C", serialize_with = "crate::serde_ext::opt_f64")]
    pub fitted_c: Option<f64>,
    #[serde(serialize_with = "map_f64")]
    pub condition_constants: BTreeMap<String, f64>,
    pub stability: Stability,
    pub runtime_s: f64,
    /// Study assertions that did not hold; drives exit code 3.
    #[serde(skip)]
    pub failures: Vec<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl StudyReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Numeric(format!("report serialization: {e}")))
    }

    /// Results rows only, one column per key seen in any row.
    pub fn to_csv(&self) -> Result<String> {
        let mut header: Vec<&str> = Vec::new();
        for row in &self.results {
            for (k, _) in &row.0 {
                if !header.contains(&k.as_str()) {
                    header.push(k);
                }
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Numeric(format!("csv: {e}"));
        w.write_record(&header).map_err(io)?;
        for row in &self.results {
            let rec: Vec<String> = header
                .iter()
                .map(|k| row.get(k).map(Cell::csv).unwrap_or_default())
                .collect();
            w.write_record(&rec).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Numeric(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Numeric(format!("csv: {e}")))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }

    pub fn write(&self, format: Format, out: &mut impl Write) -> Result<()> {
        out.write_all(self.render(format)?.as_bytes())
            .map_err(|e| Error::Config(format!("cannot write report: {e}")))
    }

    /// Report without the wall-clock field, for reproducibility checks.
    pub fn payload(&self) -> Result<serde_json::Value> {
        let mut v = serde_json::to_value(self).map_err(|e| Error::Numeric(e.to_string()))?;
        if let Some(obj) = v.as_object_mut() {
            obj.remove("runtime_s");
        }
        Ok(v)
    }
}
