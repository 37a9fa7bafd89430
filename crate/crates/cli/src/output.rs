//! Tabular output, CSV/JSON emission and run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::ValueEnum;
use crossmag::{Complex64, ProbeConfig, SteadyState, SweepSpec, SystemParams};
use serde::Serialize;
use serde_json::{json, Map, Value as Json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Real(f64),
    Complex(Complex64),
    Flag(bool),
    Count(u64),
    Text(&'static str),
    /// Undefined value, e.g. the delay at a transmission zero.
    Missing,
}

/// Column-typed table. Complex columns expand to `re_`/`im_` pairs in CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: &'static str,
    pub columns: Vec<(String, ColumnKind)>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Real,
    Complex,
    Flag,
    Count,
    Text,
}

impl Table {
    pub fn new(schema: &'static str, columns: &[(&str, ColumnKind)]) -> Self {
        Table {
            schema,
            columns: columns.iter().map(|(n, k)| (n.to_string(), *k)).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_columns(schema: &'static str, columns: Vec<(String, ColumnKind)>) -> Self {
        Table { schema, columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn csv_header(&self) -> Vec<String> {
        self.columns
            .iter()
            .flat_map(|(name, kind)| match kind {
                ColumnKind::Complex => vec![format!("re_{name}"), format!("im_{name}")],
                _ => vec![name.clone()],
            })
            .collect()
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.csv_header())?;
        for row in &self.rows {
            let mut record = Vec::with_capacity(row.len() * 2);
            for (cell, (_, kind)) in row.iter().zip(&self.columns) {
                match (cell, kind) {
                    (Cell::Complex(z), _) => {
                        record.push(z.re.to_string());
                        record.push(z.im.to_string());
                    }
                    (Cell::Missing, ColumnKind::Complex) => {
                        record.push(String::new());
                        record.push(String::new());
                    }
                    (Cell::Missing, _) => record.push(String::new()),
                    (Cell::Real(v), _) => record.push(v.to_string()),
                    (Cell::Flag(b), _) => record.push(u8::from(*b).to_string()),
                    (Cell::Count(n), _) => record.push(n.to_string()),
                    (Cell::Text(t), _) => record.push(t.to_string()),
                }
            }
            w.write_record(&record)?;
        }
        Ok(w.into_inner()?)
    }

    pub fn to_json(&self) -> Json {
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (cell, (name, _)) in row.iter().zip(&self.columns) {
                    obj.insert(name.clone(), cell_json(cell));
                }
                Json::Object(obj)
            })
            .collect();
        json!({ "schema": self.schema, "rows": rows })
    }
}

fn cell_json(cell: &Cell) -> Json {
    match cell {
        Cell::Real(v) => finite(*v),
        Cell::Complex(z) => json!({ "re": finite(z.re), "im": finite(z.im) }),
        Cell::Flag(b) => json!(b),
        Cell::Count(n) => json!(n),
        Cell::Text(t) => json!(t),
        Cell::Missing => Json::Null,
    }
}

fn finite(v: f64) -> Json {
    serde_json::Number::from_f64(v).map_or(Json::Null, Json::Number)
}

/// Everything needed to reproduce an output file.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub command: String,
    pub params: SystemParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steady: Option<SteadyState>,
    pub schemas: Vec<&'static str>,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, params: &SystemParams) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            command: command.into(),
            params: params.clone(),
            probe: None,
            sweep: None,
            steady: None,
            schemas: Vec::new(),
            outputs: Vec::new(),
        }
    }
}

/// Writes all artifacts of one run into the output directory. The manifest
/// `<stem>.manifest.json` lists every file written under the same stem.
pub struct Sink {
    dir: PathBuf,
    format: Format,
    manifest: RunManifest,
}

impl Sink {
    pub fn new(dir: &Path, format: Format, manifest: RunManifest) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Sink {
            dir: dir.to_path_buf(),
            format,
            manifest,
        })
    }

    fn write_file(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut f = fs::File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
        f.write_all(bytes).with_context(|| format!("cannot write {}", path.display()))?;
        self.manifest.outputs.push(path.clone());
        Ok(path)
    }

    pub fn table(&mut self, stem: &str, table: &Table) -> Result<PathBuf> {
        self.table_as(stem, table, self.format)
    }

    pub fn table_as(&mut self, stem: &str, table: &Table, format: Format) -> Result<PathBuf> {
        let bytes = match format {
            Format::Csv => table.to_csv()?,
            Format::Json => serde_json::to_vec_pretty(&table.to_json())?,
        };
        if !self.manifest.schemas.contains(&table.schema) {
            self.manifest.schemas.push(table.schema);
        }
        self.write_file(&format!("{stem}.{}", format.extension()), &bytes)
    }

    pub fn json(&mut self, stem: &str, value: &impl Serialize) -> Result<PathBuf> {
        let bytes = serde_json::to_vec_pretty(value)?;
        self.write_file(&format!("{stem}.json"), &bytes)
    }

    pub fn svg(&mut self, stem: &str, svg: &str) -> Result<PathBuf> {
        self.write_file(&format!("{stem}.svg"), svg.as_bytes())
    }

    /// Writes the manifest and returns the list of files produced.
    pub fn finish(mut self, stem: &str) -> Result<Vec<PathBuf>> {
        let path = self.dir.join(format!("{stem}.manifest.json"));
        self.manifest.outputs.push(path.clone());
        let bytes = serde_json::to_vec_pretty(&self.manifest)?;
        fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(self.manifest.outputs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("test/1", &[("x", ColumnKind::Real), ("z", ColumnKind::Complex), ("flag", ColumnKind::Flag)]);
        t.push(vec![Cell::Real(0.5), Cell::Complex(Complex64::new(1.0, -2.0)), Cell::Flag(true)]);
        t.push(vec![Cell::Real(-1e-7), Cell::Missing, Cell::Flag(false)]);
        t
    }

    #[test]
    fn complex_columns_expand_in_csv() {
        let csv = String::from_utf8(sample().to_csv().unwrap()).unwrap();
        assert_eq!(csv, "x,re_z,im_z,flag\n0.5,1,-2,1\n-0.0000001,,,0\n");
    }

    #[test]
    fn complex_cells_are_objects_in_json() {
        let j = sample().to_json();
        assert_eq!(j["rows"][0]["z"], json!({"re": 1.0, "im": -2.0}));
        assert_eq!(j["rows"][1]["z"], Json::Null);
        assert_eq!(j["schema"], "test/1");
    }

    #[test]
    fn floats_round_trip_through_csv() {
        let v = 0.1 + 0.2;
        let mut t = Table::new("t/1", &[("v", ColumnKind::Real)]);
        t.push(vec![Cell::Real(v)]);
        let csv = String::from_utf8(t.to_csv().unwrap()).unwrap();
        let parsed: f64 = csv.lines().nth(1).unwrap().parse().unwrap();
        assert_eq!(parsed, v);
    }
}
