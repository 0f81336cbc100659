//! `evaluate`: fairness and risk metrics of a prediction file, or a
//! frontier sweep over a directory of per-alpha runs.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use serde_json::json;

use fairreg_core::dist1d::DEFAULT_GRID;
use fairreg_core::fairness::{
    group_means, ks_unfairness, unfairness_estimate, weighted_mse, GroupedPairs,
    GroupedPredictions,
};
use fairreg_core::Weights64;

use crate::io::{read_predictions, write_csv, write_json, CsvField, PredictionTable};
use crate::manifest::RunManifest;
use crate::{resolve_weights, CliError, CliResult};

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    /// Prediction CSV with a target column.
    #[arg(long, required_unless_present = "frontier", conflicts_with = "frontier")]
    pub predictions: Option<PathBuf>,
    /// Directory whose sub-directories each hold a run (a prediction CSV
    /// plus its manifest.json with an `alpha` in the config).
    #[arg(long)]
    pub frontier: Option<PathBuf>,
    /// Group weights: proportional | inverse | equal | explicit list.
    #[arg(long, default_value = "proportional")]
    pub weights: String,
    /// Order of the unfairness estimator.
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    /// Quantile grid of the unfairness estimator.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &EvaluateArgs) -> CliResult<()> {
    if let Some(dir) = &args.frontier {
        run_frontier(args, dir)
    } else {
        run_single(args)
    }
}

fn run_single(args: &EvaluateArgs) -> CliResult<()> {
    let path = args.predictions.as_ref().expect("clap enforces input");
    let table = read_predictions(path, true)?;
    let weights = resolve_weights(&args.weights, &table.group_counts())?;
    let metrics = table_metrics(&table, &weights, args.q, args.grid)?;
    let manifest = RunManifest::new(
        "evaluate",
        0,
        args,
        Some(table.labels.clone()),
        vec!["metrics.json".into()],
    )?;
    let payload = json!({
        "manifest": manifest.to_value(),
        "metrics": metrics,
    });
    write_json(&args.out.join("metrics.json"), &payload)?;
    manifest.write(&args.out)
}

fn run_frontier(args: &EvaluateArgs, dir: &Path) -> CliResult<()> {
    let mut runs: Vec<(f64, PathBuf)> = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?.path();
        if !entry.is_dir() {
            continue;
        }
        let manifest_path = entry.join("manifest.json");
        if !manifest_path.is_file() {
            continue;
        }
        let manifest: RunManifest =
            serde_json::from_str(&std::fs::read_to_string(&manifest_path)?).map_err(|e| {
                CliError::validation(format!("{}: {e}", manifest_path.display()))
            })?;
        let alpha = manifest
            .config
            .get("alpha")
            .and_then(serde_json::Value::as_f64);
        let csv = manifest
            .output_files
            .iter()
            .find(|f| f.ends_with(".csv"))
            .map(|f| entry.join(f));
        if let (Some(alpha), Some(csv)) = (alpha, csv) {
            if csv.is_file() {
                runs.push((alpha, csv));
            }
        }
    }
    if runs.is_empty() {
        return Err(CliError::validation(format!(
            "{}: no run directories with manifests carrying an alpha",
            dir.display()
        )));
    }
    runs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite alpha"));

    let mut rows = Vec::new();
    for (alpha, csv) in &runs {
        let table = read_predictions(csv, false)?;
        let weights = resolve_weights(&args.weights, &table.group_counts())?;
        let preds = GroupedPredictions::new(table.grouped_predictions())?;
        let unfairness = unfairness_estimate(&preds, &weights, args.q, args.grid)?;
        let mse = match table.grouped_pairs() {
            Some(groups) => {
                let pairs = GroupedPairs::new(groups)?;
                weighted_mse(&pairs, &weights)?
            }
            None => f64::NAN,
        };
        rows.push(vec![
            CsvField::Number(*alpha),
            CsvField::Number(mse),
            CsvField::Number(unfairness),
        ]);
    }
    write_csv(
        &args.out.join("frontier.csv"),
        &["alpha", "weighted_mse", "unfairness_estimate"],
        &rows,
    )?;
    let manifest = RunManifest::new("evaluate", 0, args, None, vec!["frontier.csv".into()])?;
    manifest.write(&args.out)
}

/// The metric block shared by `evaluate` and `postprocess`.
pub fn table_metrics(
    table: &PredictionTable,
    weights: &Weights64,
    q: f64,
    grid: usize,
) -> CliResult<serde_json::Value> {
    let preds = GroupedPredictions::new(table.grouped_predictions())?;
    let unfairness = unfairness_estimate(&preds, weights, q, grid)?;
    let ks = ks_unfairness(&preds, weights)?;
    let mse = match table.grouped_pairs() {
        Some(groups) => {
            let pairs = GroupedPairs::new(groups)?;
            Some(weighted_mse(&pairs, weights)?)
        }
        None => None,
    };
    Ok(json!({
        "q": q,
        "unfairness_estimate": unfairness,
        "ks_unfairness": ks,
        "weighted_mse": mse,
        "group_labels": table.labels,
        "group_counts": table.group_counts(),
        "group_means": group_means(&preds),
        "weights": weights.as_slice(),
    }))
}
