//! CSV ingestion and atomic, reproducible file output.
//!
//! Prediction files are CSV with a header: a required `prediction` column
//! (real), a required `group` column (integer or string label, mapped to
//! indices in first-appearance order), and an optional `target` column.
//! Feature columns (`feature_0`, ...) are accepted and ignored by the
//! metric commands. Numbers are written with 17 significant digits so a
//! write/read/write cycle is a fixpoint.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::{CliError, CliResult};

/// A parsed prediction table with its stable group-label mapping.
#[derive(Debug, Clone)]
pub struct PredictionTable {
    /// Group labels in first-appearance order (index = internal group id).
    pub labels: Vec<String>,
    /// Internal group id per row.
    pub group_of_row: Vec<usize>,
    pub predictions: Vec<f64>,
    /// Present when the file has a `target` column.
    pub targets: Option<Vec<f64>>,
}

impl PredictionTable {
    pub fn group_count(&self) -> usize {
        self.labels.len()
    }

    pub fn group_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.labels.len()];
        for &g in &self.group_of_row {
            counts[g] += 1;
        }
        counts
    }

    /// Predictions regrouped by internal group id.
    pub fn grouped_predictions(&self) -> Vec<Vec<f64>> {
        let mut groups = vec![Vec::new(); self.labels.len()];
        for (&g, &p) in self.group_of_row.iter().zip(&self.predictions) {
            groups[g].push(p);
        }
        groups
    }

    /// `(prediction, target)` pairs by group; `None` without targets.
    pub fn grouped_pairs(&self) -> Option<Vec<Vec<(f64, f64)>>> {
        let targets = self.targets.as_ref()?;
        let mut groups = vec![Vec::new(); self.labels.len()];
        for ((&g, &p), &y) in self.group_of_row.iter().zip(&self.predictions).zip(targets) {
            groups[g].push((p, y));
        }
        Some(groups)
    }
}

/// Read a prediction CSV; `require_target` fails early when no target
/// column is present.
pub fn read_predictions(path: &Path, require_target: bool) -> CliResult<PredictionTable> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let pred_col = find("prediction").ok_or_else(|| {
        CliError::validation(format!("{}: missing `prediction` column", path.display()))
    })?;
    let group_col = find("group").ok_or_else(|| {
        CliError::validation(format!("{}: missing `group` column", path.display()))
    })?;
    let target_col = find("target");
    if require_target && target_col.is_none() {
        return Err(CliError::validation(format!(
            "{}: missing `target` column",
            path.display()
        )));
    }

    let mut labels: Vec<String> = Vec::new();
    let mut label_index: HashMap<String, usize> = HashMap::new();
    let mut group_of_row = Vec::new();
    let mut predictions = Vec::new();
    let mut targets = target_col.map(|_| Vec::new());
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let parse = |col: usize, what: &str| -> CliResult<f64> {
            let raw = record.get(col).unwrap_or("");
            raw.trim().parse::<f64>().map_err(|_| {
                CliError::validation(format!(
                    "{} row {}: invalid {what} {raw:?}",
                    path.display(),
                    line + 2
                ))
            })
        };
        predictions.push(parse(pred_col, "prediction")?);
        if let (Some(col), Some(store)) = (target_col, targets.as_mut()) {
            store.push(parse(col, "target")?);
        }
        let label = record.get(group_col).unwrap_or("").trim().to_string();
        if label.is_empty() {
            return Err(CliError::validation(format!(
                "{} row {}: empty group label",
                path.display(),
                line + 2
            )));
        }
        let id = *label_index.entry(label.clone()).or_insert_with(|| {
            labels.push(label);
            labels.len() - 1
        });
        group_of_row.push(id);
    }
    if predictions.is_empty() {
        return Err(CliError::validation(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    Ok(PredictionTable {
        labels,
        group_of_row,
        predictions,
        targets,
    })
}

/// 17-significant-digit decimal form; parses back to the identical value.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write bytes atomically (temp file in the target directory + rename).
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
    }
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))?;
    tmp.write_all(bytes)?;
    tmp.persist(path)
        .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// Write a numeric CSV: header plus rows of (label | 17-digit number).
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<CsvField>]) -> CliResult<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .map(|field| match field {
                CsvField::Number(x) => fmt17(*x),
                CsvField::Label(s) => s.clone(),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// One CSV cell: a number (canonically formatted) or a verbatim label.
#[derive(Debug, Clone)]
pub enum CsvField {
    Number(f64),
    Label(String),
}

/// Serialize a JSON value deterministically and write it atomically.
pub fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::validation(format!("json serialization: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
