//! `oracle-curve`: closed-form trade-off curve of the optimal
//! alpha-improvement family, from an explicit Gaussian group model or from
//! per-group prediction samples.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use serde_json::json;

use fairreg_core::dist1d::{Distribution1D, DEFAULT_GRID};
use fairreg_core::oracle::{tradeoff_curve, OracleModel, TradeoffPoint};
use fairreg_core::Weights64;

use crate::io::{read_predictions, write_csv, write_json, CsvField};
use crate::manifest::RunManifest;
use crate::{default_alpha_grid, resolve_weights, CliError, CliResult};

#[derive(Debug, Args, Serialize)]
pub struct CurveArgs {
    /// Gaussian group means, comma separated (with --stds).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "samples")]
    pub means: Option<Vec<f64>>,
    /// Gaussian group standard deviations, comma separated.
    #[arg(long, value_delimiter = ',', requires = "means")]
    pub stds: Option<Vec<f64>>,
    /// Prediction CSV (columns prediction, group) as the group sample.
    #[arg(long, required_unless_present = "means")]
    pub samples: Option<PathBuf>,
    /// Group weights: proportional | inverse | equal | explicit list.
    /// Named schemes other than `equal` need sample input.
    #[arg(long, default_value = "equal")]
    pub weights: String,
    /// Fairness levels, comma separated.
    #[arg(long = "alphas-grid", value_delimiter = ',')]
    pub alphas_grid: Option<Vec<f64>>,
    /// Transport order.
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    /// Quantile grid for non-closed-form unfairness evaluation.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Curve points plus the label table when samples were ingested.
pub type CurveOutput = (Vec<TradeoffPoint<f64>>, Option<Vec<String>>);

pub fn run(args: &CurveArgs) -> CliResult<()> {
    let (points, labels) = execute(args)?;
    write_outputs(args, &points, labels)
}

/// Build the model and evaluate the curve (shared with the tests).
pub fn execute(args: &CurveArgs) -> CliResult<CurveOutput> {
    let alphas = args
        .alphas_grid
        .clone()
        .unwrap_or_else(default_alpha_grid);
    let (model, labels) = build_model(args)?;
    let points = tradeoff_curve(&model, &alphas, args.q, args.grid)?;
    Ok((points, labels))
}

fn build_model(args: &CurveArgs) -> CliResult<(OracleModel<f64>, Option<Vec<String>>)> {
    if let Some(means) = &args.means {
        let stds = args
            .stds
            .as_ref()
            .ok_or_else(|| CliError::validation("--means requires --stds"))?;
        if means.len() != stds.len() {
            return Err(CliError::validation(format!(
                "{} means vs {} stds",
                means.len(),
                stds.len()
            )));
        }
        let weights = match args.weights.as_str() {
            "equal" => Weights64::uniform(means.len()),
            "proportional" | "inverse" => {
                return Err(CliError::validation(
                    "count-based weight schemes need --samples input",
                ))
            }
            spec => resolve_weights(spec, &vec![1usize; means.len()])?,
        };
        let dists = means
            .iter()
            .zip(stds)
            .map(|(&m, &s)| Distribution1D::gaussian(m, s))
            .collect::<fairreg_core::Result<Vec<_>>>()?;
        Ok((OracleModel::new(dists, weights)?, None))
    } else {
        let path = args.samples.as_ref().expect("clap enforces model input");
        let table = read_predictions(path, false)?;
        let weights = resolve_weights(&args.weights, &table.group_counts())?;
        let dists = table
            .grouped_predictions()
            .iter()
            .map(|g| Distribution1D::empirical_uniform(g))
            .collect::<fairreg_core::Result<Vec<_>>>()?;
        Ok((OracleModel::new(dists, weights)?, Some(table.labels)))
    }
}

fn write_outputs(
    args: &CurveArgs,
    points: &[TradeoffPoint<f64>],
    labels: Option<Vec<String>>,
) -> CliResult<()> {
    let rows: Vec<Vec<CsvField>> = points
        .iter()
        .map(|p| {
            vec![
                CsvField::Number(p.alpha),
                CsvField::Number(p.risk),
                CsvField::Number(p.unfairness),
            ]
        })
        .collect();
    write_csv(&args.out.join("curve.csv"), &["alpha", "risk", "unfairness"], &rows)?;

    let manifest = RunManifest::new(
        "oracle-curve",
        0,
        args,
        labels,
        vec!["curve.csv".into(), "curve.json".into()],
    )?;
    let curve: Vec<serde_json::Value> = points
        .iter()
        .map(|p| json!({"alpha": p.alpha, "risk": p.risk, "unfairness": p.unfairness}))
        .collect();
    let payload = json!({
        "manifest": manifest.to_value(),
        "curve": curve,
    });
    write_json(&args.out.join("curve.json"), &payload)?;
    manifest.write(&args.out)
}
