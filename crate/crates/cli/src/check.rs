//! `check`: self-contained property suites. Each suite prints one line per
//! check and the command exits nonzero when any check fails.

use clap::Args;
use serde::Serialize;

use fairreg_core::dist1d::{ks_distance, Distribution1D, WeightVector, DEFAULT_GRID};
use fairreg_core::oracle::{check_geodesic_contraction, tradeoff_curve, OracleModel};
use fairreg_core::postprocess::{calibrate, rank_uniformity_test};
use fairreg_core::rng;

use crate::{CliError, CliResult};

#[derive(Debug, Args, Serialize)]
pub struct CheckArgs {
    /// Which property suite to run.
    #[arg(long, value_parser = ["geometric", "rank-uniform", "dp", "tradeoff"])]
    pub suite: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run(args: &CheckArgs) -> CliResult<()> {
    let ok = match args.suite.as_str() {
        "geometric" => {
            let report = geodesic_suite(100_000, args.seed)?;
            for case in &report.cases {
                println!(
                    "geometric alpha={:.2}: constraint_gap={:.3e} objective_gap={:.3e} {}",
                    case.alpha,
                    case.constraint_gap,
                    case.objective_gap,
                    verdict(case.pass)
                );
            }
            report.cases.iter().all(|c| c.pass)
        }
        "rank-uniform" => {
            let report = rank_uniform_suite(100_000, args.seed)?;
            for case in &report.cases {
                println!(
                    "rank-uniform n={} law={}: ks={:.5} threshold={:.5} {}",
                    case.n,
                    case.law,
                    case.ks_statistic,
                    case.threshold,
                    verdict(case.pass)
                );
            }
            report.cases.iter().all(|c| c.pass)
        }
        "dp" => {
            let report = dp_suite(100, args.seed)?;
            println!(
                "dp: {}/{} trials below the 1% critical value {:.4} (median ks {:.4}) {}",
                report.passes,
                report.trials,
                report.critical_value,
                report.median_ks,
                verdict(report.pass)
            );
            report.pass
        }
        "tradeoff" => {
            let report = tradeoff_suite(20, args.seed)?;
            println!(
                "tradeoff: {} models, max identity deviation {:.3e}, half-fairness risk ratio deviation {:.3e} {}",
                report.models,
                report.max_identity_deviation,
                report.max_ratio_deviation,
                verdict(report.pass)
            );
            report.pass
        }
        other => return Err(CliError::validation(format!("unknown suite {other:?}"))),
    };
    if ok {
        Ok(())
    } else {
        Err(CliError::SuiteFailure(format!(
            "suite {:?} failed",
            args.suite
        )))
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// A random Gaussian group model for identity checks.
pub fn random_gaussian_model(seed: u64) -> OracleModel<f64> {
    let mut r = rng::derive_rng(seed, 90);
    let k = 2 + (rng::uniform_01::<f64, _>(&mut r) * 3.0) as usize;
    let dists: Vec<Distribution1D<f64>> = (0..k)
        .map(|_| {
            let m = 6.0 * rng::uniform_01::<f64, _>(&mut r) - 3.0;
            let s = 0.5 + 1.5 * rng::uniform_01::<f64, _>(&mut r);
            Distribution1D::gaussian(m, s).unwrap()
        })
        .collect();
    let raw: Vec<f64> = (0..k).map(|_| 0.2 + rng::uniform_01::<f64, _>(&mut r)).collect();
    let total: f64 = raw.iter().sum();
    let weights = WeightVector::new(raw.into_iter().map(|x| x / total).collect()).unwrap();
    OracleModel::new(dists, weights).unwrap()
}

/// Closed-form unfairness of a Gaussian group model (independent of the
/// transport code path): weighted squared distances to the mean/spread
/// averages.
pub fn gaussian_model_unfairness(model: &OracleModel<f64>) -> f64 {
    let params: Vec<(f64, f64)> = model
        .distributions()
        .iter()
        .map(|d| d.gaussian_params().expect("gaussian model"))
        .collect();
    let w = model.weights().as_slice();
    let mean_bar: f64 = params.iter().zip(w).map(|(&(m, _), &w)| w * m).sum();
    let std_bar: f64 = params.iter().zip(w).map(|(&(_, s), &w)| w * s).sum();
    params
        .iter()
        .zip(w)
        .map(|(&(m, s), &w)| w * ((m - mean_bar).powi(2) + (s - std_bar).powi(2)))
        .sum()
}

#[derive(Debug, Clone)]
pub struct GeodesicCase {
    pub alpha: f64,
    pub constraint_gap: f64,
    pub objective_gap: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct GeodesicReport {
    pub cases: Vec<GeodesicCase>,
}

/// Geodesic contraction on the isosceles-triangle configuration with
/// weights (0.1, 0.4, 0.5).
pub fn geodesic_suite(candidates: usize, seed: u64) -> CliResult<GeodesicReport> {
    let points = vec![vec![-1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.8]];
    let weights = WeightVector::new(vec![0.1, 0.4, 0.5])?;
    let mut cases = Vec::new();
    for (i, alpha) in [0.25, 0.5, 0.75].into_iter().enumerate() {
        let report = check_geodesic_contraction(
            &points,
            &weights,
            alpha,
            candidates,
            rng::substream_seed(seed, i as u64),
        )?;
        cases.push(GeodesicCase {
            alpha,
            constraint_gap: report.constraint_gap,
            objective_gap: report.objective_gap,
            pass: report.constraint_satisfied && report.objective_gap <= 1e-6,
        });
    }
    Ok(GeodesicReport { cases })
}

#[derive(Debug, Clone)]
pub struct RankCase {
    pub n: usize,
    pub law: &'static str,
    pub ks_statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct RankUniformReport {
    pub cases: Vec<RankCase>,
}

/// Randomized-rank uniformity across sample sizes and value laws
/// (continuous, two-point with heavy ties, degenerate).
pub fn rank_uniform_suite(draws: usize, seed: u64) -> CliResult<RankUniformReport> {
    let laws: Vec<(&'static str, Distribution1D<f64>)> = vec![
        ("continuous", Distribution1D::gaussian(0.0, 1.0)?),
        (
            "two-point",
            Distribution1D::empirical_uniform(&[0.0, 1.0])?,
        ),
        ("degenerate", Distribution1D::point_mass(0.0)),
    ];
    let mut cases = Vec::new();
    for (i, &n) in [1usize, 5, 50].iter().enumerate() {
        for (j, (name, law)) in laws.iter().enumerate() {
            let report = rank_uniformity_test(
                n,
                law,
                draws,
                rng::substream_seed(seed, (i * laws.len() + j) as u64),
            )?;
            cases.push(RankCase {
                n,
                law: name,
                ks_statistic: report.ks_statistic,
                threshold: report.threshold,
                pass: report.pass,
            });
        }
    }
    Ok(RankUniformReport { cases })
}

#[derive(Debug, Clone)]
pub struct DpReport {
    pub trials: usize,
    pub passes: usize,
    pub critical_value: f64,
    pub median_ks: f64,
    pub pass: bool,
}

/// Demographic parity of the randomized transform: base laws N(0, 1) and
/// N(3, 0.5), calibration halves of 500 per group. The guaranteed equality
/// of group-wise output laws covers the calibration randomness, so each
/// trial pools its 10^4 per-group transforms across 50 independent
/// calibrations (conditioning on a single calibration leaves an
/// O(N^{-1/2}) gap that no KS test at this resolution would accept).
pub fn dp_suite(trials: usize, seed: u64) -> CliResult<DpReport> {
    let n_cal = 500usize;
    let cals_per_trial = 50usize;
    let per_cal = 200usize; // 10^4 transforms per group per trial
    let transforms = cals_per_trial * per_cal;
    let critical_value = 1.63 * (2.0 / transforms as f64).sqrt();

    let mut passes = 0usize;
    let mut ks_values = Vec::with_capacity(trials);
    for trial in 0..trials {
        let trial_seed = rng::substream_seed(seed, trial as u64);
        let mut out0 = Vec::with_capacity(transforms);
        let mut out1 = Vec::with_capacity(transforms);
        for c in 0..cals_per_trial {
            let cal_seed = rng::substream_seed(trial_seed, c as u64);
            let mut draws = rng::derive_rng(cal_seed, 0);
            let g0: Vec<f64> = (0..2 * n_cal)
                .map(|_| rng::standard_normal::<f64, _>(&mut draws))
                .collect();
            let g1: Vec<f64> = (0..2 * n_cal)
                .map(|_| 3.0 + 0.5 * rng::standard_normal::<f64, _>(&mut draws))
                .collect();
            let mut cal = calibrate(&[g0, g1], WeightVector::uniform(2), 1e-6, cal_seed)?;
            let mut fresh = rng::derive_rng(cal_seed, 1);
            for _ in 0..per_cal {
                let x0 = rng::standard_normal::<f64, _>(&mut fresh);
                let x1 = 3.0 + 0.5 * rng::standard_normal::<f64, _>(&mut fresh);
                out0.push(cal.transform(x0, 0)?);
                out1.push(cal.transform(x1, 1)?);
            }
        }
        let d0 = Distribution1D::empirical_uniform(&out0)?;
        let d1 = Distribution1D::empirical_uniform(&out1)?;
        let ks = ks_distance(&d0, &d1);
        if ks < critical_value {
            passes += 1;
        }
        ks_values.push(ks);
    }
    ks_values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let median_ks = ks_values[ks_values.len() / 2];
    Ok(DpReport {
        trials,
        passes,
        critical_value,
        median_ks,
        pass: passes * 100 >= trials * 95,
    })
}

#[derive(Debug, Clone)]
pub struct TradeoffReport {
    pub models: usize,
    pub max_identity_deviation: f64,
    pub max_ratio_deviation: f64,
    pub pass: bool,
}

/// Trade-off identities on random Gaussian models: risk(alpha) =
/// (1 - sqrt(alpha))^2 U, unfairness(alpha) = alpha U, and the ~8.58%
/// risk ratio at alpha = 1/2.
pub fn tradeoff_suite(models: usize, seed: u64) -> CliResult<TradeoffReport> {
    let alphas: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let half_ratio = (1.0 - 0.5f64.sqrt()).powi(2);
    let mut max_identity = 0.0f64;
    let mut max_ratio = 0.0f64;
    for m in 0..models {
        let model = random_gaussian_model(rng::substream_seed(seed, m as u64));
        let u = gaussian_model_unfairness(&model);
        let curve = tradeoff_curve(&model, &alphas, 2.0, DEFAULT_GRID)?;
        for p in &curve {
            let expected_risk = (1.0 - p.alpha.sqrt()).powi(2) * u;
            let expected_unf = p.alpha * u;
            max_identity = max_identity
                .max((p.risk - expected_risk).abs() / u)
                .max((p.unfairness - expected_unf).abs() / u);
        }
        let ratio = curve[10].risk / curve[0].risk;
        max_ratio = max_ratio.max((ratio - half_ratio).abs());
    }
    Ok(TradeoffReport {
        models,
        max_identity_deviation: max_identity,
        max_ratio_deviation: max_ratio,
        pass: max_identity <= 1e-4 && max_ratio <= 1e-4,
    })
}
