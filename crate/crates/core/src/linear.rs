//! Linear regression with systematic group-dependent bias: simulation,
//! joint least squares over features plus group intercepts, the
//! tau-shrunk estimator family, the data-driven tau calibration, and the
//! repeated-simulation study that measures risk and unfairness against
//! the closed-form optimum.
//!
//! The model is `Y = <X, beta> + b_S + xi` with Gaussian features and
//! noise; only the intercept varies by group, so the unfairness of a fit
//! reduces to the weighted variance of its intercepts.

use crate::dist1d::WeightVector;
use crate::error::{Error, Result};
use crate::linalg::{least_squares, Matrix};
use crate::rng::{derive_rng, standard_normal, substream_seed};
use crate::scalar::Real;

/// Ground-truth model parameters and the per-group sample sizes.
#[derive(Debug, Clone)]
pub struct LinearBiasModel<F> {
    coefficients: Vec<F>,
    group_bias: Vec<F>,
    noise_sigma: F,
    covariance: Matrix<F>,
    chol: Matrix<F>,
    group_sizes: Vec<usize>,
}

impl<F: Real> LinearBiasModel<F> {
    pub fn new(
        coefficients: Vec<F>,
        group_bias: Vec<F>,
        noise_sigma: F,
        covariance: Matrix<F>,
        group_sizes: Vec<usize>,
    ) -> Result<Self> {
        if group_bias.is_empty() {
            return Err(Error::empty("model needs at least one group"));
        }
        if group_sizes.len() != group_bias.len() {
            return Err(Error::domain("one sample size per group required"));
        }
        if group_sizes.contains(&0) {
            return Err(Error::domain("group sample sizes must be >= 1"));
        }
        if !(noise_sigma > F::zero()) {
            return Err(Error::domain("noise level sigma must be positive"));
        }
        if covariance.nrows() != coefficients.len() || covariance.ncols() != coefficients.len() {
            return Err(Error::domain("covariance dimension mismatch"));
        }
        let chol = covariance.cholesky()?;
        Ok(LinearBiasModel {
            coefficients,
            group_bias,
            noise_sigma,
            covariance,
            chol,
            group_sizes,
        })
    }

    /// Convenience constructor with identity feature covariance.
    pub fn with_identity_covariance(
        coefficients: Vec<F>,
        group_bias: Vec<F>,
        noise_sigma: F,
        group_sizes: Vec<usize>,
    ) -> Result<Self> {
        let p = coefficients.len();
        LinearBiasModel::new(
            coefficients,
            group_bias,
            noise_sigma,
            Matrix::identity(p),
            group_sizes,
        )
    }

    pub fn feature_dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn group_count(&self) -> usize {
        self.group_bias.len()
    }

    pub fn total_samples(&self) -> usize {
        self.group_sizes.iter().sum()
    }

    pub fn coefficients(&self) -> &[F] {
        &self.coefficients
    }

    pub fn group_bias(&self) -> &[F] {
        &self.group_bias
    }

    pub fn noise_sigma(&self) -> F {
        self.noise_sigma
    }

    pub fn covariance(&self) -> &Matrix<F> {
        &self.covariance
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    /// `w_s = n_s / n`, the convention used throughout this model.
    pub fn proportional_weights(&self) -> WeightVector<F> {
        let n = F::of_usize(self.total_samples());
        let w = self
            .group_sizes
            .iter()
            .map(|&ns| F::of_usize(ns) / n)
            .collect();
        WeightVector::new(w).expect("proportional weights normalize")
    }
}

/// Per-group design matrices and targets drawn from the model.
#[derive(Debug, Clone)]
pub struct GroupedData<F> {
    features: Vec<Matrix<F>>,
    targets: Vec<Vec<F>>,
}

impl<F: Real> GroupedData<F> {
    pub fn new(features: Vec<Matrix<F>>, targets: Vec<Vec<F>>) -> Result<Self> {
        if features.is_empty() || features.len() != targets.len() {
            return Err(Error::domain("feature/target group mismatch"));
        }
        let p = features[0].ncols();
        for (s, (x, y)) in features.iter().zip(&targets).enumerate() {
            if x.ncols() != p {
                return Err(Error::domain(format!("group {s}: feature width differs")));
            }
            if x.nrows() != y.len() || y.is_empty() {
                return Err(Error::domain(format!(
                    "group {s}: rows and targets do not match"
                )));
            }
        }
        Ok(GroupedData { features, targets })
    }

    pub fn group_count(&self) -> usize {
        self.features.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.features[0].ncols()
    }

    pub fn features(&self, s: usize) -> &Matrix<F> {
        &self.features[s]
    }

    pub fn targets(&self, s: usize) -> &[F] {
        &self.targets[s]
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        self.features.iter().map(Matrix::nrows).collect()
    }
}

/// Draw one data set from the model; bit-identical for a fixed seed.
pub fn simulate<F: Real>(model: &LinearBiasModel<F>, seed: u64) -> GroupedData<F> {
    let mut rng = derive_rng(seed, 0);
    let p = model.feature_dim();
    let mut features = Vec::with_capacity(model.group_count());
    let mut targets = Vec::with_capacity(model.group_count());
    let mut z = vec![F::zero(); p];
    for (s, &ns) in model.group_sizes.iter().enumerate() {
        let mut x = Matrix::zeros(ns, p);
        let mut y = Vec::with_capacity(ns);
        for i in 0..ns {
            for zj in z.iter_mut() {
                *zj = standard_normal(&mut rng);
            }
            let row = model.chol.lower_mul(&z);
            let mut dot = F::zero();
            for (j, &v) in row.iter().enumerate() {
                x[(i, j)] = v;
                dot += v * model.coefficients[j];
            }
            let noise: F = standard_normal(&mut rng);
            y.push(dot + model.group_bias[s] + model.noise_sigma * noise);
        }
        features.push(x);
        targets.push(y);
    }
    GroupedData { features, targets }
}

/// Jointly fitted feature coefficients and per-group intercepts.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit<F> {
    pub coefficients: Vec<F>,
    pub intercepts: Vec<F>,
}

/// Joint least squares over the stacked `(n x (p + K))` design of features
/// and group indicators, solved by orthogonal (QR) decomposition. With
/// proportional weights this equals the weighted group-wise objective.
pub fn fit_least_squares<F: Real>(data: &GroupedData<F>) -> Result<LinearFit<F>> {
    let p = data.feature_dim();
    let k = data.group_count();
    let n: usize = data.group_sizes().iter().sum();
    if n < p + k {
        return Err(Error::domain(format!(
            "need at least {} rows to fit {} columns",
            p + k,
            p + k
        )));
    }
    let mut design = Matrix::zeros(n, p + k);
    let mut rhs = Vec::with_capacity(n);
    let mut row = 0usize;
    for s in 0..k {
        let x = data.features(s);
        for i in 0..x.nrows() {
            for j in 0..p {
                design[(row, j)] = x[(i, j)];
            }
            design[(row, p + s)] = F::one();
            rhs.push(data.targets(s)[i]);
            row += 1;
        }
    }
    let solution = least_squares(&design, &rhs).map_err(|column| Error::SingularSystem {
        block: if column < p { "feature" } else { "group intercept" },
        column,
    })?;
    Ok(LinearFit {
        coefficients: solution[..p].to_vec(),
        intercepts: solution[p..].to_vec(),
    })
}

/// Prediction of the tau-shrunk estimator at `(x, s)`:
/// `<x, beta> + sqrt(tau) b_s + (1 - sqrt(tau)) sum_s w_s b_s`.
pub fn predict_with_tau<F: Real>(
    fit: &LinearFit<F>,
    weights: &WeightVector<F>,
    tau: F,
    x: &[F],
    group: usize,
) -> Result<F> {
    if !(tau >= F::zero() && tau <= F::one()) {
        return Err(Error::domain(format!("tau = {tau} outside [0, 1]")));
    }
    if group >= fit.intercepts.len() {
        return Err(Error::domain("group index out of range"));
    }
    if x.len() != fit.coefficients.len() {
        return Err(Error::domain("feature dimension mismatch"));
    }
    if weights.len() != fit.intercepts.len() {
        return Err(Error::weights("one weight per group required"));
    }
    let dot: F = x
        .iter()
        .zip(&fit.coefficients)
        .map(|(&xi, &bi)| xi * bi)
        .sum();
    let pooled = weighted_mean(&fit.intercepts, weights);
    let root = tau.sqrt();
    Ok(dot + root * fit.intercepts[group] + (F::one() - root) * pooled)
}

fn weighted_mean<F: Real>(values: &[F], weights: &WeightVector<F>) -> F {
    values
        .iter()
        .zip(weights.as_slice())
        .map(|(&v, &w)| v * w)
        .sum()
}

/// Weighted variance of a vector under `weights`.
pub fn weighted_variance<F: Real>(values: &[F], weights: &WeightVector<F>) -> F {
    let mean = weighted_mean(values, weights);
    values
        .iter()
        .zip(weights.as_slice())
        .map(|(&v, &w)| {
            let d = v - mean;
            w * d * d
        })
        .sum()
}

/// Closed-form unfairness of the tau-shrunk fit:
/// `tau * sum_s w_s (b_s - pooled)^2`, the scaled weighted variance of the
/// fitted intercepts. Matches the transport-based unfairness of the
/// induced Gaussian group laws.
pub fn fit_unfairness<F: Real>(
    fit: &LinearFit<F>,
    weights: &WeightVector<F>,
    tau: F,
) -> Result<F> {
    if !(tau >= F::zero() && tau <= F::one()) {
        return Err(Error::domain(format!("tau = {tau} outside [0, 1]")));
    }
    if weights.len() != fit.intercepts.len() {
        return Err(Error::weights("one weight per group required"));
    }
    Ok(tau * weighted_variance(&fit.intercepts, weights))
}

/// Estimation-rate configuration: feature dimension, group count, total
/// sample size, and the confidence parameter of the high-probability
/// statement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConfig<F> {
    pub features: usize,
    pub groups: usize,
    pub samples: usize,
    pub confidence: F,
    pub simplified: bool,
}

impl<F: Real> RateConfig<F> {
    pub fn new(
        features: usize,
        groups: usize,
        samples: usize,
        confidence: F,
        simplified: bool,
    ) -> Result<Self> {
        if features == 0 || groups == 0 || samples == 0 {
            return Err(Error::domain("rate config needs features, groups, samples >= 1"));
        }
        if !(confidence >= F::zero()) {
            return Err(Error::domain("confidence parameter must be >= 0"));
        }
        Ok(RateConfig {
            features,
            groups,
            samples,
            confidence,
            simplified,
        })
    }
}

/// Parameter-estimation rate `delta_n`. The full form is
/// `8 (p/n + K/n) + 16 (sqrt(p/n) + sqrt(K/n)) sqrt(t/n) + 32 t/n`;
/// the simplified form drops constants to `(p + K) / n`.
pub fn estimation_rate<F: Real>(cfg: &RateConfig<F>) -> F {
    let p = F::of_usize(cfg.features);
    let k = F::of_usize(cfg.groups);
    let n = F::of_usize(cfg.samples);
    if cfg.simplified {
        return (p + k) / n;
    }
    let t = cfg.confidence;
    F::of(8.0) * (p / n + k / n)
        + F::of(16.0) * ((p / n).sqrt() + (k / n).sqrt()) * (t / n).sqrt()
        + F::of(32.0) * t / n
}

/// Data-driven shrinkage of the fairness parameter: the target `alpha` is
/// deflated by the estimation error of the intercepts, so the fitted
/// unfairness stays below `alpha` times the true one with high
/// probability. Always `<= alpha`; 0 when the measured unfairness is
/// indistinguishable from noise.
pub fn calibrated_tau<F: Real>(
    fit: &LinearFit<F>,
    weights: &WeightVector<F>,
    alpha: F,
    sigma: F,
    cfg: &RateConfig<F>,
) -> Result<F> {
    if !(alpha >= F::zero() && alpha <= F::one()) {
        return Err(Error::domain(format!("alpha = {alpha} outside [0, 1]")));
    }
    if !(sigma > F::zero()) {
        return Err(Error::domain("sigma must be positive"));
    }
    let u1 = fit_unfairness(fit, weights, F::one())?;
    let noise = sigma * estimation_rate(cfg).sqrt();
    let measured = u1.sqrt();
    if measured > noise {
        let factor = F::one() + noise / (measured - noise);
        Ok(alpha / (factor * factor))
    } else {
        Ok(F::zero())
    }
}

/// Rate appearing in the matching risk lower bound, usable as a reference
/// curve next to simulation output:
/// `(sqrt((p + K) / n) + sqrt(32 t / n))^2 / (3 * 2^9)`.
pub fn lower_bound_rate<F: Real>(cfg: &RateConfig<F>) -> F {
    let p = F::of_usize(cfg.features);
    let k = F::of_usize(cfg.groups);
    let n = F::of_usize(cfg.samples);
    let t = cfg.confidence;
    let root = ((p + k) / n).sqrt() + (F::of(32.0) * t / n).sqrt();
    root * root / F::of(3.0 * 512.0)
}

/// Composite minimax risk floor for estimators honoring the fairness
/// constraint: `max(sigma^2 * delta, (1 - sqrt(alpha))^2 * unfairness)`,
/// the estimation price or the fairness price, whichever dominates.
pub fn minimax_risk_floor<F: Real>(delta: F, alpha: F, unfairness: F, sigma: F) -> F {
    let shrink = F::one() - alpha.sqrt();
    (sigma * sigma * delta).max(shrink * shrink * unfairness)
}

/// Whether the sample-size condition of the high-probability guarantee
/// holds: `sqrt(n) >= 2 (sqrt(p) + sqrt(t)) / (theta - sqrt(theta^2 - 3))`
/// with `theta = (4 sqrt(K) + 5 sqrt(t) + 6 sqrt(p)) / (sqrt(p) + sqrt(t))`.
pub fn sample_size_sufficient<F: Real>(cfg: &RateConfig<F>) -> bool {
    let p = F::of_usize(cfg.features).sqrt();
    let k = F::of_usize(cfg.groups).sqrt();
    let t = cfg.confidence.sqrt();
    let denom = p + t;
    if denom <= F::zero() {
        return false;
    }
    let theta = (F::of(4.0) * k + F::of(5.0) * t + F::of(6.0) * p) / denom;
    let disc = theta * theta - F::of(3.0);
    if disc < F::zero() {
        return false;
    }
    let bound = F::of(2.0) * denom / (theta - disc.sqrt());
    F::of_usize(cfg.samples).sqrt() >= bound
}

/// Group-bias vector realizing a prescribed noise-to-unfairness ratio:
/// scales the pattern `v` so that the model unfairness equals exactly
/// `sigma^2 / ratio^2`.
pub fn bias_from_noise_ratio<F: Real>(
    pattern: &[F],
    weights: &WeightVector<F>,
    sigma: F,
    ratio: F,
) -> Result<Vec<F>> {
    if pattern.len() != weights.len() {
        return Err(Error::weights("one weight per pattern entry"));
    }
    if !(sigma > F::zero()) || !(ratio > F::zero()) {
        return Err(Error::domain("sigma and noise-to-unfairness ratio must be positive"));
    }
    let var = weighted_variance(pattern, weights);
    if var <= F::zero() {
        return Err(Error::domain("bias pattern must not be constant"));
    }
    let scale = (sigma * sigma / (ratio * ratio * var)).sqrt();
    Ok(pattern.iter().map(|&v| v * scale).collect())
}

/// Which rule maps the target `alpha` to the shrinkage `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauRule {
    /// The calibrated, error-aware choice.
    Proposed,
    /// `tau = alpha`, ignoring estimation error.
    Naive,
}

/// Configuration of the repeated-simulation study.
#[derive(Debug, Clone)]
pub struct StudyProtocol<F> {
    pub feature_dim: usize,
    pub group_sizes: Vec<usize>,
    pub noise_sigma: F,
    /// Noise-to-unfairness ratio `sigma / sqrt(U)`.
    pub noise_to_unfairness: F,
    /// Strictly increasing grid of fairness levels in `[0, 1]`.
    pub alphas: Vec<F>,
    pub repetitions: usize,
    pub tau_rule: TauRule,
    /// Confidence parameter fed into the full estimation rate.
    pub confidence: F,
    /// Use the `(p + K) / n` rate instead of the full-constant one.
    pub simplified_rate: bool,
    pub seed: u64,
}

/// Per-alpha aggregates over the repetitions.
#[derive(Debug, Clone, Copy)]
pub struct AlphaSummary<F> {
    pub alpha: F,
    pub mean_risk: F,
    pub std_risk: F,
    pub mean_unfairness: F,
    pub std_unfairness: F,
    pub oracle_risk: F,
    pub oracle_unfairness: F,
    /// Repetitions where the fitted unfairness exceeded `alpha * U`.
    pub violations: usize,
}

/// Study output: per-alpha aggregates plus the cumulative risk gap
/// (trapezoid integral of mean risk minus optimal risk over the grid).
#[derive(Debug, Clone)]
pub struct StudySummary<F> {
    pub per_alpha: Vec<AlphaSummary<F>>,
    pub cumulative_risk_gap: F,
    /// True model unfairness `U = sigma^2 / ratio^2`.
    pub target_unfairness: F,
    pub repetitions: usize,
    pub sample_size_ok: bool,
    /// Largest `tau - alpha` observed (the calibrated rule keeps it <= 0).
    pub max_tau_minus_alpha: F,
}

/// Run the simulation study: repeatedly draw data, fit, pick `tau` per the
/// rule, and score exact population risk and unfairness against the
/// closed-form optimum.
///
/// The generated model has identity feature covariance, all-ones
/// coefficients, and an alternating `±1` bias pattern scaled so the model
/// unfairness is exactly `sigma^2 / ratio^2`.
///
/// Repetitions use independent seed-derived streams, so they can be
/// evaluated in any order (aggregation is commutative); results are
/// deterministic for a fixed protocol.
pub fn run_study<F: Real>(protocol: &StudyProtocol<F>) -> Result<StudySummary<F>> {
    if protocol.repetitions == 0 {
        return Err(Error::domain("study needs at least one repetition"));
    }
    if protocol.alphas.is_empty() {
        return Err(Error::empty("study needs a fairness grid"));
    }
    for pair in protocol.alphas.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(Error::domain("alpha grid must be strictly increasing"));
        }
    }
    for &a in &protocol.alphas {
        if !(a >= F::zero() && a <= F::one()) {
            return Err(Error::domain(format!("alpha = {a} outside [0, 1]")));
        }
    }

    let p = protocol.feature_dim;
    let k = protocol.group_sizes.len();
    let coefficients = vec![F::one(); p];
    let pattern: Vec<F> = (0..k)
        .map(|s| if s % 2 == 0 { F::one() } else { -F::one() })
        .collect();
    let n: usize = protocol.group_sizes.iter().sum();
    let weights = WeightVector::new(
        protocol
            .group_sizes
            .iter()
            .map(|&ns| F::of_usize(ns) / F::of_usize(n))
            .collect(),
    )?;
    let bias = bias_from_noise_ratio(
        &pattern,
        &weights,
        protocol.noise_sigma,
        protocol.noise_to_unfairness,
    )?;
    let model = LinearBiasModel::with_identity_covariance(
        coefficients,
        bias,
        protocol.noise_sigma,
        protocol.group_sizes.clone(),
    )?;
    let target_unfairness = weighted_variance(model.group_bias(), &weights);
    let cfg = RateConfig::new(p, k, n, protocol.confidence, protocol.simplified_rate)?;

    let reps = protocol.repetitions;
    let n_alphas = protocol.alphas.len();
    let mut risks = vec![vec![F::zero(); reps]; n_alphas];
    let mut unfairnesses = vec![vec![F::zero(); reps]; n_alphas];
    let mut violations = vec![0usize; n_alphas];
    let mut max_tau_minus_alpha = F::neg_infinity();

    for rep in 0..reps {
        let data = simulate(&model, substream_seed(protocol.seed, rep as u64));
        let fit = fit_least_squares(&data)?;
        let coef_err: F = fit
            .coefficients
            .iter()
            .zip(model.coefficients())
            .map(|(&a, &b)| {
                let d = a - b;
                d * d
            })
            .sum();
        let pooled = weighted_mean(&fit.intercepts, &weights);
        for (i, &alpha) in protocol.alphas.iter().enumerate() {
            let tau = match protocol.tau_rule {
                TauRule::Proposed => {
                    calibrated_tau(&fit, &weights, alpha, protocol.noise_sigma, &cfg)?
                }
                TauRule::Naive => alpha,
            };
            max_tau_minus_alpha = max_tau_minus_alpha.max(tau - alpha);
            let root = tau.sqrt();
            let mut bias_risk = F::zero();
            for (s, &w) in weights.as_slice().iter().enumerate() {
                let predicted = root * fit.intercepts[s] + (F::one() - root) * pooled;
                let d = predicted - model.group_bias()[s];
                bias_risk += w * d * d;
            }
            let risk = coef_err + bias_risk;
            let unf = fit_unfairness(&fit, &weights, tau)?;
            risks[i][rep] = risk;
            unfairnesses[i][rep] = unf;
            if unf > alpha * target_unfairness {
                violations[i] += 1;
            }
        }
    }

    let mut per_alpha = Vec::with_capacity(n_alphas);
    for (i, &alpha) in protocol.alphas.iter().enumerate() {
        let (mean_risk, std_risk) = mean_std(&risks[i]);
        let (mean_unfairness, std_unfairness) = mean_std(&unfairnesses[i]);
        let shrink = F::one() - alpha.sqrt();
        per_alpha.push(AlphaSummary {
            alpha,
            mean_risk,
            std_risk,
            mean_unfairness,
            std_unfairness,
            oracle_risk: shrink * shrink * target_unfairness,
            oracle_unfairness: alpha * target_unfairness,
            violations: violations[i],
        });
    }

    let mut cumulative_risk_gap = F::zero();
    for pair in per_alpha.windows(2) {
        let g0 = pair[0].mean_risk - pair[0].oracle_risk;
        let g1 = pair[1].mean_risk - pair[1].oracle_risk;
        cumulative_risk_gap += (pair[1].alpha - pair[0].alpha) * (g0 + g1) / F::of(2.0);
    }

    Ok(StudySummary {
        per_alpha,
        cumulative_risk_gap,
        target_unfairness,
        repetitions: reps,
        sample_size_ok: sample_size_sufficient(&cfg),
        max_tau_minus_alpha,
    })
}

fn mean_std<F: Real>(xs: &[F]) -> (F, F) {
    let n = F::of_usize(xs.len());
    let mean = xs.iter().copied().sum::<F>() / n;
    if xs.len() < 2 {
        return (mean, F::zero());
    }
    let var = xs
        .iter()
        .map(|&x| {
            let d = x - mean;
            d * d
        })
        .sum::<F>()
        / (n - F::one());
    (mean, var.sqrt())
}
