//! Command-line front end over the core library: simulation studies of the
//! bias-adjusted least-squares estimator, closed-form trade-off curves,
//! model-free fair post-processing of prediction files, metric reports, and
//! self-contained property suites.
//!
//! Every run resolves its configuration into a manifest that is written
//! alongside the result files; re-running with the manifest's seed and
//! flags reproduces the numeric CSVs byte for byte.

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

pub mod check;
pub mod curve;
pub mod evaluate;
pub mod io;
pub mod manifest;
pub mod postprocess;
pub mod simulate;

/// Exit codes: 0 success, 1 validation error, 2 numerical failure,
/// 3 property-suite failure.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    SuiteFailure(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::SuiteFailure(_) => 3,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

impl From<fairreg_core::Error> for CliError {
    fn from(err: fairreg_core::Error) -> Self {
        use fairreg_core::Error::*;
        match err {
            SingularSystem { .. } | NotSpd => CliError::Numerical(err.to_string()),
            Domain(_) | Weights(_) | Empty(_) => CliError::Validation(err.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Validation(format!("i/o error: {err}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(err: csv::Error) -> Self {
        CliError::Validation(format!("csv error: {err}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "fairreg",
    version,
    about = "Risk-fairness trade-off toolkit for regression"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Subcommand)]
pub enum Command {
    /// Simulation study of the bias-adjusted least-squares estimator.
    SimulateLinear(simulate::SimulateArgs),
    /// Closed-form risk/unfairness trade-off curve of the optimal family.
    OracleCurve(curve::CurveArgs),
    /// Fair post-processing of a prediction file against a calibration set.
    Postprocess(postprocess::PostprocessArgs),
    /// Fairness and risk metrics of a prediction file (or a frontier).
    Evaluate(evaluate::EvaluateArgs),
    /// Run one of the built-in property suites.
    Check(check::CheckArgs),
}

/// Parse and execute; the entry point shared by the binary and the tests.
pub fn run<I, T>(args: I) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err)
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) =>
        {
            print!("{err}");
            return Ok(());
        }
        Err(err) => {
            let msg = err.to_string();
            let msg = msg.strip_prefix("error: ").unwrap_or(&msg);
            return Err(CliError::validation(msg.trim_end()));
        }
    };
    match cli.command {
        Command::SimulateLinear(args) => simulate::run(&args),
        Command::OracleCurve(args) => curve::run(&args),
        Command::Postprocess(args) => postprocess::run(&args),
        Command::Evaluate(args) => evaluate::run(&args),
        Command::Check(args) => check::run(&args),
    }
}

/// Comma-separated `f64` list used by several flags.
pub fn parse_f64_list(spec: &str) -> Result<Vec<f64>, String> {
    spec.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| format!("invalid number {tok:?}"))
        })
        .collect()
}

/// Default fairness grid: 21 evenly spaced levels on `[0, 1]`.
pub fn default_alpha_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

/// Group weights flag: one of the named schemes or an explicit list.
pub fn resolve_weights(
    spec: &str,
    group_counts: &[usize],
) -> CliResult<fairreg_core::Weights64> {
    use fairreg_core::fairness::{weights_from_counts, WeightScheme};
    let scheme = match spec {
        "proportional" => Some(WeightScheme::Proportional),
        "inverse" => Some(WeightScheme::Inverse),
        "equal" => Some(WeightScheme::Equal),
        _ => None,
    };
    if let Some(scheme) = scheme {
        return Ok(weights_from_counts(scheme, group_counts)?);
    }
    let raw = parse_f64_list(spec).map_err(CliError::validation)?;
    if raw.len() != group_counts.len() {
        return Err(CliError::validation(format!(
            "{} weights given for {} groups",
            raw.len(),
            group_counts.len()
        )));
    }
    let sum: f64 = raw.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(CliError::validation(format!(
            "explicit weights sum to {sum}, expected 1"
        )));
    }
    Ok(fairreg_core::Weights64::new(raw)?)
}
