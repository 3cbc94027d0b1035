//! CSV tables, their schema check, and JSON run manifests.
//!
//! CSV files are UTF-8, comma separated, with one header row. Reals are
//! written as `{:.16e}` (17 significant digits); time columns are in units
//! of the drive period. Every `name.csv` gets a `name.json` manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{BoostError, Result};
use crate::propagator::Certificate;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Text(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Real,
    Int,
    Text,
}

/// Expected header and cell kinds of a CSV file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CsvSchema {
    pub columns: Vec<(String, ColumnKind)>,
}

impl CsvSchema {
    pub fn reals<S: AsRef<str>>(names: &[S]) -> Self {
        CsvSchema {
            columns: names
                .iter()
                .map(|n| (n.as_ref().to_string(), ColumnKind::Real))
                .collect(),
        }
    }

    pub fn header(&self) -> Vec<&str> {
        self.columns.iter().map(|(n, _)| n.as_str()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub schema: CsvSchema,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(schema: CsvSchema) -> Self {
        CsvTable {
            schema,
            rows: Vec::new(),
        }
    }

    pub fn push_reals(&mut self, row: impl IntoIterator<Item = f64>) {
        self.rows.push(row.into_iter().map(Cell::Real).collect());
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(self.schema.header()).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| match c {
                Cell::Real(x) => format!("{x:.16e}"),
                Cell::Int(x) => x.to_string(),
                Cell::Text(t) => t.clone(),
            }))
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8 cells")
    }
}

/// Checks CSV text against a schema. Returns the number of data rows.
pub fn validate_csv(text: &str, schema: &CsvSchema) -> std::result::Result<usize, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = records.next().ok_or("empty file")?.map_err(|e| e.to_string())?;
    if header.iter().collect::<Vec<_>>() != schema.header() {
        return Err(format!("header mismatch: expected {} columns", schema.columns.len()));
    }
    let mut count = 0;
    for (i, record) in records.enumerate() {
        let cells = record.map_err(|e| e.to_string())?;
        if cells.len() != schema.columns.len() {
            return Err(format!(
                "row {} has {} cells, expected {}",
                i + 1,
                cells.len(),
                schema.columns.len()
            ));
        }
        for (cell, (name, kind)) in cells.iter().zip(&schema.columns) {
            let ok = match kind {
                ColumnKind::Real => cell.parse::<f64>().is_ok_and(|x| !x.is_nan()),
                ColumnKind::Int => cell.parse::<i64>().is_ok(),
                ColumnKind::Text => !cell.is_empty(),
            };
            if !ok {
                return Err(format!("row {} column `{name}`: bad value `{cell}`", i + 1));
            }
        }
        count += 1;
    }
    Ok(count)
}

/// Per-file run record.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub file: String,
    pub version: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub wall_time_s: f64,
    pub leakage_max: f64,
    pub certificates: Vec<NamedCertificate>,
    pub schema: CsvSchema,
    pub rows: usize,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NamedCertificate {
    pub run: String,
    #[serde(flatten)]
    pub certificate: Certificate,
}

/// Information shared by every manifest of one experiment run.
#[derive(Clone, Debug, Serialize)]
pub struct RunContext {
    pub experiment: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub certificates: Vec<NamedCertificate>,
    pub notes: Vec<String>,
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Writes `dir/name.csv`, re-reads and validates it, then writes
/// `dir/name.json`. Returns the CSV path.
pub fn write_table(dir: &Path, name: &str, table: &CsvTable, ctx: &RunContext, wall_time_s: f64) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{name}.csv"));
    fs::write(&csv_path, table.render())?;
    let text = fs::read_to_string(&csv_path)?;
    let rows = validate_csv(&text, &table.schema).map_err(|reason| BoostError::Schema {
        file: csv_path.display().to_string(),
        reason,
    })?;
    let manifest = RunManifest {
        experiment: ctx.experiment.clone(),
        file: format!("{name}.csv"),
        version: VERSION.to_string(),
        config: ctx.config.clone(),
        seed: ctx.seed,
        wall_time_s,
        leakage_max: ctx
            .certificates
            .iter()
            .map(|c| c.certificate.max_leakage)
            .fold(0.0, f64::max),
        certificates: ctx.certificates.clone(),
        schema: table.schema.clone(),
        rows,
        notes: ctx.notes.clone(),
    };
    fs::write(
        dir.join(format!("{name}.json")),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(csv_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> CsvTable {
        let mut t = CsvTable::new(CsvSchema {
            columns: vec![
                ("t_over_T".into(), ColumnKind::Real),
                ("h".into(), ColumnKind::Int),
                ("kind".into(), ColumnKind::Text),
            ],
        });
        t.push(vec![Cell::Real(0.1), Cell::Int(3), Cell::Text("convergent".into())]);
        t.push(vec![
            Cell::Real(1.0 / 3.0),
            Cell::Int(5),
            Cell::Text("semiconvergent".into()),
        ]);
        t
    }

    #[test]
    fn renders_seventeen_digits() {
        let text = table().render();
        assert!(text.starts_with("t_over_T,h,kind\n"));
        assert!(text.contains("3.3333333333333331e-1,5,semiconvergent"));
        let back: f64 = "3.3333333333333331e-1".parse().unwrap();
        assert_eq!(back, 1.0 / 3.0);
    }

    #[test]
    fn validates_its_own_output() {
        let t = table();
        assert_eq!(validate_csv(&t.render(), &t.schema), Ok(2));
    }

    #[test]
    fn catches_schema_violations() {
        let s = table().schema;
        assert!(validate_csv("", &s).is_err());
        assert!(validate_csv("t,h,kind\n", &s).is_err());
        assert!(validate_csv("t_over_T,h,kind\n1.0,2\n", &s).is_err());
        assert!(validate_csv("t_over_T,h,kind\n1.0,2.5,x\n", &s).is_err());
        assert!(validate_csv("t_over_T,h,kind\nNaN,2,x\n", &s).is_err());
    }

    #[test]
    fn writes_csv_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let ctx = RunContext {
            experiment: "demo".into(),
            config: serde_json::json!({"a": 1}),
            seed: Some(7),
            certificates: vec![],
            notes: vec![],
        };
        let path = write_table(dir.path(), "demo", &table(), &ctx, 0.5).unwrap();
        assert!(path.exists());
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("demo.json")).unwrap()).unwrap();
        assert_eq!(manifest["rows"], 2);
        assert_eq!(manifest["seed"], 7);
        assert_eq!(manifest["version"], VERSION);
    }
}
