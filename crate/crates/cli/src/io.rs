//! On-disk formats: point CSVs, metadata sidecars and objective traces.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tsne_forensics_core::datasets::GeneratorInfo;
use tsne_forensics_core::Matrix;

pub const LABEL_COLUMN: &str = "label";

/// Shortest decimal that parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Points plus optional integer labels, as stored in a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub points: Matrix,
    pub labels: Option<Vec<i64>>,
}

pub fn points_to_csv(points: &Matrix, labels: Option<&[i64]>) -> Result<Vec<u8>> {
    if let Some(l) = labels {
        if l.len() != points.rows() {
            bail!("{} labels for {} rows", l.len(), points.rows());
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (0..points.cols()).map(|c| format!("c{c}")).collect();
    if labels.is_some() {
        header.push(LABEL_COLUMN.into());
    }
    w.write_record(&header)?;
    for (i, row) in points.iter_rows().enumerate() {
        let mut record: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        if let Some(l) = labels {
            record.push(l[i].to_string());
        }
        w.write_record(&record)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub fn write_points(path: &Path, points: &Matrix, labels: Option<&[i64]>) -> Result<()> {
    create_parent(path)?;
    fs::write(path, points_to_csv(points, labels)?)
        .with_context(|| format!("writing {}", path.display()))
}

pub fn parse_points(bytes: &[u8]) -> Result<Table> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers()?.clone();
    let mut dim = 0;
    let mut has_label = false;
    for (k, name) in header.iter().enumerate() {
        if name == LABEL_COLUMN && k + 1 == header.len() {
            has_label = true;
        } else if name == format!("c{k}") {
            dim += 1;
        } else {
            bail!("unexpected column {name:?} at position {k}; expected c0..c<d-1> optionally followed by label");
        }
    }
    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut rows = 0;
    for (line, record) in r.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            bail!(
                "row {} has {} fields, expected {}",
                line + 1,
                record.len(),
                header.len()
            );
        }
        for field in record.iter().take(dim) {
            data.push(
                field
                    .trim()
                    .parse::<f64>()
                    .with_context(|| format!("row {}: bad number {field:?}", line + 1))?,
            );
        }
        if has_label {
            let field = record.get(dim).unwrap_or_default();
            labels.push(
                field
                    .trim()
                    .parse::<i64>()
                    .with_context(|| format!("row {}: bad label {field:?}", line + 1))?,
            );
        }
        rows += 1;
    }
    Ok(Table {
        points: Matrix::from_vec(rows, dim, data)?,
        labels: has_label.then_some(labels),
    })
}

pub fn read_points(path: &Path) -> Result<Table> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    parse_points(&bytes).with_context(|| format!("parsing {}", path.display()))
}

/// Contents of the `<stem>.meta.json` file written next to a generated CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub generator: GeneratorInfo,
    pub n: usize,
    pub d: usize,
    pub has_labels: bool,
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    create_parent(path)?;
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn trace_to_csv(trace: &[f64]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["iteration", "objective"])?;
    for (t, v) in trace.iter().enumerate() {
        w.write_record([t.to_string(), format_f64(*v)])?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub fn create_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(())
}
