//! `simulate-linear`: repeated-simulation study of the bias-adjusted
//! least-squares estimator under the systematic-group-bias linear model.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use serde_json::json;

use fairreg_core::linear::{
    lower_bound_rate, minimax_risk_floor, run_study, sample_size_sufficient, RateConfig,
    StudyProtocol, StudySummary, TauRule,
};

use crate::io::{write_csv, write_json, CsvField};
use crate::manifest::RunManifest;
use crate::{default_alpha_grid, CliError, CliResult};

/// `2 ln(4 / 0.05)`: the failure probability of the high-probability
/// guarantee, `4 exp(-t/2)`, equals 5% at this confidence parameter.
const DEFAULT_CONFIDENCE: f64 = 8.764053269347762;

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Feature dimension p.
    #[arg(long)]
    pub p: usize,
    /// Number of groups K (must match --group-sizes when both are given).
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// Per-group sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub group_sizes: Vec<usize>,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Noise-to-unfairness ratio sigma / sqrt(U).
    #[arg(long)]
    pub nur: f64,
    /// Fairness levels, comma separated and strictly increasing.
    #[arg(long = "alphas-grid", value_delimiter = ',')]
    pub alphas_grid: Option<Vec<f64>>,
    /// Number of repetitions.
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    /// Shrinkage rule: the calibrated choice or tau = alpha.
    #[arg(long, value_parser = ["proposed", "naive"], default_value = "proposed")]
    pub tau_rule: String,
    /// Confidence parameter of the estimation rate.
    #[arg(long, default_value_t = DEFAULT_CONFIDENCE)]
    pub t: f64,
    /// Estimation-rate variant.
    #[arg(long, value_parser = ["simplified", "full"], default_value = "simplified")]
    pub delta_variant: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    let summary = execute(args)?;
    write_outputs(args, &summary)
}

/// Validate flags and run the study (shared with the tests).
pub fn execute(args: &SimulateArgs) -> CliResult<StudySummary<f64>> {
    if args.group_sizes.is_empty() {
        return Err(CliError::validation("--group-sizes must not be empty"));
    }
    if let Some(k) = args.k {
        if k != args.group_sizes.len() {
            return Err(CliError::validation(format!(
                "--K {} does not match {} group sizes",
                k,
                args.group_sizes.len()
            )));
        }
    }
    let alphas = args
        .alphas_grid
        .clone()
        .unwrap_or_else(default_alpha_grid);
    let protocol = StudyProtocol {
        feature_dim: args.p,
        group_sizes: args.group_sizes.clone(),
        noise_sigma: args.sigma,
        noise_to_unfairness: args.nur,
        alphas,
        repetitions: args.reps,
        tau_rule: match args.tau_rule.as_str() {
            "naive" => TauRule::Naive,
            _ => TauRule::Proposed,
        },
        confidence: args.t,
        simplified_rate: args.delta_variant == "simplified",
        seed: args.seed,
    };
    let n: usize = args.group_sizes.iter().sum();
    if let Ok(cfg) = RateConfig::new(args.p, args.group_sizes.len(), n, args.t, false) {
        if !sample_size_sufficient(&cfg) {
            eprintln!(
                "warning: sample-size condition fails at n = {n} (p = {}, K = {}, t = {}); \
                 the high-probability guarantee does not apply",
                args.p,
                args.group_sizes.len(),
                args.t
            );
        }
    }
    Ok(run_study(&protocol)?)
}

fn write_outputs(args: &SimulateArgs, summary: &StudySummary<f64>) -> CliResult<()> {
    let rows: Vec<Vec<CsvField>> = summary
        .per_alpha
        .iter()
        .map(|a| {
            vec![
                CsvField::Number(a.alpha),
                CsvField::Number(a.mean_risk),
                CsvField::Number(a.std_risk),
                CsvField::Number(a.mean_unfairness),
                CsvField::Number(a.std_unfairness),
                CsvField::Number(a.oracle_risk),
                CsvField::Number(a.oracle_unfairness),
            ]
        })
        .collect();
    write_csv(
        &args.out.join("summary.csv"),
        &[
            "alpha",
            "mean_risk",
            "std_risk",
            "mean_unfairness",
            "std_unfairness",
            "oracle_risk",
            "oracle_unfairness",
        ],
        &rows,
    )?;

    let manifest = RunManifest::new(
        "simulate-linear",
        args.seed,
        args,
        None,
        vec!["summary.csv".into(), "summary.json".into()],
    )?;
    // Reference curve: the larger of the estimation-rate floor and the
    // fairness price, per alpha.
    let n: usize = args.group_sizes.iter().sum();
    let floor_rate = RateConfig::new(args.p, args.group_sizes.len(), n, args.t, false)
        .map(|cfg| lower_bound_rate(&cfg))
        .unwrap_or(0.0);
    let per_alpha: Vec<serde_json::Value> = summary
        .per_alpha
        .iter()
        .map(|a| {
            json!({
                "alpha": a.alpha,
                "mean_risk": a.mean_risk,
                "std_risk": a.std_risk,
                "mean_unfairness": a.mean_unfairness,
                "std_unfairness": a.std_unfairness,
                "oracle_risk": a.oracle_risk,
                "oracle_unfairness": a.oracle_unfairness,
                "violations": a.violations,
                "minimax_floor": minimax_risk_floor(
                    floor_rate,
                    a.alpha,
                    summary.target_unfairness,
                    args.sigma,
                ),
            })
        })
        .collect();
    let payload = json!({
        "manifest": manifest.to_value(),
        "summary": {
            "cumulative_risk_gap": summary.cumulative_risk_gap,
            "target_unfairness": summary.target_unfairness,
            "repetitions": summary.repetitions,
            "sample_size_ok": summary.sample_size_ok,
            "max_tau_minus_alpha": summary.max_tau_minus_alpha,
            "per_alpha": per_alpha,
        },
    });
    write_json(&args.out.join("summary.json"), &payload)?;
    manifest.write(&args.out)
}
