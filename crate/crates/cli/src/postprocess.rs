//! `postprocess`: calibrate the randomized fair transform on an unlabeled
//! prediction file and apply the alpha-interpolated version to an
//! evaluation file.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use serde_json::json;

use fairreg_core::dist1d::DEFAULT_GRID;
use fairreg_core::postprocess::calibrate;

use crate::evaluate::table_metrics;
use crate::io::{read_predictions, write_csv, write_json, CsvField, PredictionTable};
use crate::manifest::RunManifest;
use crate::{resolve_weights, CliError, CliResult};

#[derive(Debug, Args, Serialize)]
pub struct PostprocessArgs {
    /// Unlabeled prediction CSV (columns prediction, group) to calibrate on.
    #[arg(long)]
    pub calibration: PathBuf,
    /// Prediction CSV to transform (targets pass through when present).
    #[arg(long)]
    pub eval: PathBuf,
    /// Fairness level in [0, 1]; 1 returns the input predictions.
    #[arg(long)]
    pub alpha: f64,
    /// Group weights: proportional | inverse | equal | explicit list
    /// (computed on the calibration group counts).
    #[arg(long, default_value = "proportional")]
    pub weights: String,
    /// Half-width of the tie-breaking jitter.
    #[arg(long, default_value_t = 1e-6)]
    pub jitter_sigma: f64,
    /// Order of the unfairness estimator in the metrics report.
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    /// Quantile grid of the unfairness estimator.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &PostprocessArgs) -> CliResult<()> {
    let calib_table = read_predictions(&args.calibration, false)?;
    let eval_table = read_predictions(&args.eval, false)?;

    let weights = resolve_weights(&args.weights, &calib_table.group_counts())?;
    let mut cal = calibrate(
        &calib_table.grouped_predictions(),
        weights.clone(),
        args.jitter_sigma,
        args.seed,
    )?;

    // Eval labels must map into the calibration's label table.
    let group_map: Vec<usize> = eval_table
        .labels
        .iter()
        .map(|label| {
            calib_table
                .labels
                .iter()
                .position(|l| l == label)
                .ok_or_else(|| {
                    CliError::validation(format!(
                        "group label {label:?} absent from the calibration file"
                    ))
                })
        })
        .collect::<CliResult<_>>()?;

    let mut transformed = Vec::with_capacity(eval_table.predictions.len());
    for (&p, &g) in eval_table
        .predictions
        .iter()
        .zip(&eval_table.group_of_row)
    {
        transformed.push(cal.predict_alpha(p, group_map[g], args.alpha)?);
    }

    let mut header = vec!["prediction", "group"];
    if eval_table.targets.is_some() {
        header.push("target");
    }
    let rows: Vec<Vec<CsvField>> = transformed
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let mut row = vec![
                CsvField::Number(p),
                CsvField::Label(eval_table.labels[eval_table.group_of_row[i]].clone()),
            ];
            if let Some(targets) = &eval_table.targets {
                row.push(CsvField::Number(targets[i]));
            }
            row
        })
        .collect();
    write_csv(&args.out.join("transformed.csv"), &header, &rows)?;

    // Metrics of the transformed predictions, grouped by the eval labels.
    let out_table = PredictionTable {
        labels: eval_table.labels.clone(),
        group_of_row: eval_table.group_of_row.clone(),
        predictions: transformed,
        targets: eval_table.targets.clone(),
    };
    let metric_weights = resolve_weights(&args.weights, &out_table.group_counts())?;
    let metrics = table_metrics(&out_table, &metric_weights, args.q, args.grid)?;

    let manifest = RunManifest::new(
        "postprocess",
        args.seed,
        args,
        Some(calib_table.labels.clone()),
        vec!["transformed.csv".into(), "metrics.json".into()],
    )?;
    let payload = json!({
        "manifest": manifest.to_value(),
        "metrics": metrics,
    });
    write_json(&args.out.join("metrics.json"), &payload)?;
    manifest.write(&args.out)
}
