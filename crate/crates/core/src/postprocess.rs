//! Model-free randomized post-processing with exact demographic parity.
//!
//! Calibration splits each group's unlabeled base predictions in half,
//! jitters them with a tiny uniform noise to break ties, and freezes a
//! randomized rank CDF on the first half plus an empirical quantile table
//! on the second. Transforming a fresh prediction composes the group's
//! randomized CDF with the weighted mixture of second-half quantile
//! functions: the randomized rank statistic of a fresh exchangeable draw
//! is exactly uniform, so transformed outputs share one distribution
//! across groups regardless of the base predictor.

use crate::dist1d::Distribution1D;
use crate::dist1d::WeightVector;
use crate::error::{Error, Result};
use crate::rng::{derive_rng, uniform_01, uniform_symmetric};
use crate::scalar::Real;

/// Rank-based CDF estimate with uniform tie-breaking: at `t` it returns
/// `(#{v < t} + U (1 + #{v = t})) / (N + 1)` for a frozen `U` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedCdf<F> {
    values: Vec<F>,
    tie_break: F,
}

impl<F: Real> RandomizedCdf<F> {
    pub fn new(mut values: Vec<F>, tie_break: F) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::empty("randomized CDF needs values"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("randomized CDF values must be finite"));
        }
        if !(tie_break >= F::zero() && tie_break <= F::one()) {
            return Err(Error::domain("tie-break draw must lie in [0, 1]"));
        }
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        Ok(RandomizedCdf { values, tie_break })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn eval(&self, t: F) -> F {
        let below = self.values.partition_point(|&v| v < t);
        let at_or_below = self.values.partition_point(|&v| v <= t);
        let ties = at_or_below - below;
        let n = F::of_usize(self.values.len());
        (F::of_usize(below) + self.tie_break * (F::one() + F::of_usize(ties))) / (n + F::one())
    }
}

#[derive(Debug, Clone)]
struct GroupCalibration<F> {
    rank_cdf: RandomizedCdf<F>,
    quantile_table: Vec<F>,
}

impl<F: Real> GroupCalibration<F> {
    /// Generalized inverse of the second-half empirical CDF.
    fn quantile(&self, u: F) -> F {
        let n = self.quantile_table.len();
        let r = (F::of_usize(n) * u).ceil();
        let idx = r.to_usize().unwrap_or(n).clamp(1, n);
        self.quantile_table[idx - 1]
    }
}

/// Frozen state of the post-processing operator.
///
/// Immutable after construction; [`Calibration::transform`] draws fresh
/// jitter from a counter-based stream (and therefore takes `&mut self`),
/// while the `_with_jitter` variants are pure and safe to share.
#[derive(Debug, Clone)]
pub struct Calibration<F> {
    groups: Vec<GroupCalibration<F>>,
    weights: WeightVector<F>,
    jitter_half_width: F,
    seed: u64,
    fresh_calls: u64,
}

/// Default jitter half-width used by callers that do not override it.
pub fn default_jitter<F: Real>() -> F {
    F::of(1e-6)
}

/// Calibrate the operator from per-group unlabeled base predictions.
///
/// Each group's array is split into equal halves (one trailing element of
/// an odd-length group is dropped), every retained element receives an
/// independent `Uniform[-sigma, sigma]` jitter, and one tie-breaking
/// uniform draw is frozen per group. Deterministic for a fixed seed.
pub fn calibrate<F: Real>(
    base_predictions: &[Vec<F>],
    weights: WeightVector<F>,
    jitter_sigma: F,
    seed: u64,
) -> Result<Calibration<F>> {
    if base_predictions.is_empty() {
        return Err(Error::empty("calibration needs at least one group"));
    }
    if base_predictions.len() != weights.len() {
        return Err(Error::weights("one weight per group required"));
    }
    if !(jitter_sigma > F::zero()) {
        return Err(Error::domain("jitter width must be positive"));
    }
    let mut rng = derive_rng(seed, 0);
    let mut groups = Vec::with_capacity(base_predictions.len());
    for (s, preds) in base_predictions.iter().enumerate() {
        if preds.len() < 2 {
            return Err(Error::domain(format!(
                "group {s} needs >= 2 calibration samples"
            )));
        }
        if preds.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain(format!("group {s} has non-finite values")));
        }
        let half = preds.len() / 2;
        let jittered: Vec<F> = preds[..2 * half]
            .iter()
            .map(|&v| v + uniform_symmetric(&mut rng, jitter_sigma))
            .collect();
        let tie_break = uniform_01(&mut rng);
        let rank_cdf = RandomizedCdf::new(jittered[..half].to_vec(), tie_break)?;
        let mut quantile_table = jittered[half..].to_vec();
        quantile_table.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        groups.push(GroupCalibration {
            rank_cdf,
            quantile_table,
        });
    }
    Ok(Calibration {
        groups,
        weights,
        jitter_half_width: jitter_sigma,
        seed,
        fresh_calls: 0,
    })
}

impl<F: Real> Calibration<F> {
    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    /// Per-half sample count of group `s`.
    pub fn half_size(&self, s: usize) -> usize {
        self.groups[s].rank_cdf.len()
    }

    pub fn weights(&self) -> &WeightVector<F> {
        &self.weights
    }

    pub fn jitter_sigma(&self) -> F {
        self.jitter_half_width
    }

    fn check_group(&self, group: usize) -> Result<()> {
        if group >= self.groups.len() {
            return Err(Error::domain(format!(
                "group index {group} out of range (K = {})",
                self.groups.len()
            )));
        }
        Ok(())
    }

    /// Transform with an injected jitter value (pure; test hook and the
    /// building block of the stream-drawing variant).
    pub fn transform_with_jitter(&self, base_value: F, group: usize, jitter: F) -> Result<F> {
        self.check_group(group)?;
        let u = self.groups[group].rank_cdf.eval(base_value + jitter);
        // Quantile domain is (0, 1]; the rank CDF can come arbitrarily
        // close to 0, so nudge up by machine epsilon.
        let u = u.max(F::epsilon()).min(F::one());
        Ok(self
            .groups
            .iter()
            .zip(self.weights.as_slice())
            .map(|(g, &w)| w * g.quantile(u))
            .sum())
    }

    /// Transform a fresh base prediction, drawing jitter from the
    /// calibration's counter-based stream.
    pub fn transform(&mut self, base_value: F, group: usize) -> Result<F> {
        let jitter = self.next_jitter();
        self.transform_with_jitter(base_value, group, jitter)
    }

    /// Element-wise batch variant of [`Calibration::transform`].
    pub fn transform_batch(&mut self, base_values: &[F], group: usize) -> Result<Vec<F>> {
        base_values
            .iter()
            .map(|&v| self.transform(v, group))
            .collect()
    }

    /// Convex interpolation between the base prediction and its fully
    /// transformed value: `sqrt(alpha) v + (1 - sqrt(alpha)) T(v)`.
    /// `alpha = 1` returns the base value without consuming randomness.
    pub fn predict_alpha(&mut self, base_value: F, group: usize, alpha: F) -> Result<F> {
        validate_alpha(alpha)?;
        if alpha == F::one() {
            self.check_group(group)?;
            return Ok(base_value);
        }
        let transformed = self.transform(base_value, group)?;
        let root = alpha.sqrt();
        Ok(root * base_value + (F::one() - root) * transformed)
    }

    /// Pure variant of [`Calibration::predict_alpha`] with injected jitter.
    pub fn predict_alpha_with_jitter(
        &self,
        base_value: F,
        group: usize,
        alpha: F,
        jitter: F,
    ) -> Result<F> {
        validate_alpha(alpha)?;
        if alpha == F::one() {
            self.check_group(group)?;
            return Ok(base_value);
        }
        let transformed = self.transform_with_jitter(base_value, group, jitter)?;
        let root = alpha.sqrt();
        Ok(root * base_value + (F::one() - root) * transformed)
    }

    /// One jitter draw from the `(seed, call counter)` stream.
    pub fn next_jitter(&mut self) -> F {
        let mut rng = derive_rng(self.seed, 1 + self.fresh_calls);
        self.fresh_calls += 1;
        uniform_symmetric(&mut rng, self.jitter_half_width)
    }
}

fn validate_alpha<F: Real>(alpha: F) -> Result<()> {
    if !(alpha >= F::zero() && alpha <= F::one()) {
        return Err(Error::domain(format!("alpha = {alpha} outside [0, 1]")));
    }
    Ok(())
}

/// One-sample Kolmogorov–Smirnov statistic against `Uniform[0, 1]`.
pub fn one_sample_ks_uniform<F: Real>(samples: &[F]) -> F {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let m = F::of_usize(xs.len());
    let mut d = F::zero();
    for (i, &x) in xs.iter().enumerate() {
        let lo = F::of_usize(i) / m;
        let hi = F::of_usize(i + 1) / m;
        d = d.max(x - lo).max(hi - x);
    }
    d
}

/// Result of the randomized-rank uniformity check.
#[derive(Debug, Clone, Copy)]
pub struct RankUniformityReport<F> {
    pub ks_statistic: F,
    /// `1.63 / sqrt(draws)`, the ~1% critical value.
    pub threshold: F,
    pub pass: bool,
}

/// Monte-Carlo check that the randomized rank statistic
/// `T = (#{V_i < V} + U (1 + #{V_i = V})) / (n + 1)` of a fresh draw
/// against `n` i.i.d. values is uniform on `[0, 1]`, including for atomic
/// laws where ties are the rule.
pub fn rank_uniformity_test<F: Real>(
    n: usize,
    value_law: &Distribution1D<F>,
    draws: usize,
    seed: u64,
) -> Result<RankUniformityReport<F>> {
    if n == 0 {
        return Err(Error::domain("rank test needs n >= 1 reference draws"));
    }
    if draws < 1_000 {
        return Err(Error::domain("rank test needs >= 1000 Monte-Carlo draws"));
    }
    let mut rng = derive_rng(seed, 0);
    let mut stats = Vec::with_capacity(draws);
    let mut reference = vec![F::zero(); n];
    for _ in 0..draws {
        for r in reference.iter_mut() {
            *r = value_law.sample(&mut rng);
        }
        let fresh = value_law.sample(&mut rng);
        let u: F = uniform_01(&mut rng);
        let below = reference.iter().filter(|&&v| v < fresh).count();
        let ties = reference.iter().filter(|&&v| v == fresh).count();
        let t = (F::of_usize(below) + u * (F::one() + F::of_usize(ties)))
            / (F::of_usize(n) + F::one());
        stats.push(t);
    }
    let ks_statistic = one_sample_ks_uniform(&stats);
    let threshold = F::of(1.63) / F::of_usize(draws).sqrt();
    Ok(RankUniformityReport {
        ks_statistic,
        threshold,
        pass: ks_statistic < threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist1d::ks_distance;
    use crate::rng;

    #[test]
    fn randomized_cdf_formula() {
        let c = RandomizedCdf::new(vec![1.0f64, 2.0, 3.0], 0.5).unwrap();
        // (2 + 0.5 * 1) / 4
        assert!((c.eval(2.5) - 0.625).abs() < 1e-15);
        // below the support: 0.5 / 4
        assert!((c.eval(0.0) - 0.125).abs() < 1e-15);
        let c = RandomizedCdf::new(vec![1.0f64, 2.0, 3.0], 0.0).unwrap();
        // tie at 2 with U = 0: (1 + 0) / 4
        assert!((c.eval(2.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn calibration_split_sizes() {
        let w = WeightVector::uniform(2);
        let cal = calibrate(
            &[vec![1.0; 4], vec![2.0; 6]],
            w.clone(),
            1e-6,
            0,
        )
        .unwrap();
        assert_eq!(cal.half_size(0), 2);
        assert_eq!(cal.half_size(1), 3);
        // odd group drops one element
        let cal = calibrate(&[vec![1.0; 5], vec![2.0; 4]], w, 1e-6, 0).unwrap();
        assert_eq!(cal.half_size(0), 2);
        assert!(calibrate(&[vec![1.0]], WeightVector::uniform(1), 1e-6, 0).is_err());
    }

    #[test]
    fn calibration_is_deterministic() {
        let w = WeightVector::uniform(2);
        let groups = vec![vec![0.1, 0.7, -0.3, 1.9], vec![2.0, 2.2, 1.8, 2.4]];
        let mut a = calibrate(&groups, w.clone(), 1e-6, 9).unwrap();
        let mut b = calibrate(&groups, w, 1e-6, 9).unwrap();
        for i in 0..10 {
            let x = i as f64 * 0.3;
            assert_eq!(a.transform(x, 0).unwrap(), b.transform(x, 0).unwrap());
        }
    }

    #[test]
    fn degenerate_quantiles_give_constant_output() {
        let w = WeightVector::new(vec![0.5, 0.5]).unwrap();
        let mut cal = calibrate(&[vec![1.0f64; 8], vec![3.0; 8]], w, 1e-9, 1).unwrap();
        for x in [-5.0, 0.0, 2.0, 100.0] {
            let y = cal.transform(x, 0).unwrap();
            assert!((y - 2.0).abs() < 1e-8, "transform({x}) = {y}");
            let y = cal.transform(x, 1).unwrap();
            assert!((y - 2.0).abs() < 1e-8);
        }
    }

    #[test]
    fn single_group_output_stays_in_second_half_support() {
        let w = WeightVector::uniform(1);
        let base: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin() * 3.0).collect();
        let mut cal = calibrate(&[base], w, 1e-6, 5).unwrap();
        for x in [-4.0, -1.0, 0.0, 2.0, 4.0] {
            let y = cal.transform(x, 0).unwrap();
            assert!((-3.1..=3.1).contains(&y));
        }
    }

    #[test]
    fn predict_alpha_interpolates() {
        let w = WeightVector::uniform(1);
        let mut cal = calibrate(&[vec![5.0f64; 6]], w, 1e-9, 2).unwrap();
        // alpha = 1: identity, no randomness consumed
        assert_eq!(cal.predict_alpha(0.3, 0, 1.0).unwrap(), 0.3);
        // alpha = 0: the transform itself (constant 5 here)
        assert!((cal.predict_alpha(0.3, 0, 0.0).unwrap() - 5.0).abs() < 1e-8);
        // alpha = 0.25: 0.5 * base + 0.5 * transform
        let y = cal.predict_alpha(1.0, 0, 0.25).unwrap();
        assert!((y - (0.5 + 2.5)).abs() < 1e-8);
        assert!(cal.predict_alpha(0.0, 0, 2.0).is_err());
    }

    #[test]
    fn transform_is_monotone_for_fixed_jitter() {
        let w = WeightVector::new(vec![0.3, 0.7]).unwrap();
        let mut rng = rng::derive_rng(77, 3);
        let g0: Vec<f64> = (0..50).map(|_| rng::standard_normal::<f64, _>(&mut rng)).collect();
        let g1: Vec<f64> = (0..50)
            .map(|_| 2.0 + 0.5 * rng::standard_normal::<f64, _>(&mut rng))
            .collect();
        let cal = calibrate(&[g0, g1], w, 1e-6, 4).unwrap();
        let jitter = 3e-7;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..100 {
            let x = -3.0 + i as f64 * 0.06;
            let y = cal.transform_with_jitter(x, 0, jitter).unwrap();
            assert!(y >= prev, "transform not monotone at {x}");
            prev = y;
        }
    }

    #[test]
    fn symmetric_groups_transform_identically_in_law() {
        // identical calibration samples and weights: the two groups play
        // symmetric roles, so the transform of a fixed input has one law
        // over the algorithm's internal randomness (jitter + tie-breaks).
        let shared: Vec<f64> = (0..30).map(|i| (i as f64).sqrt()).collect();
        let x = 2.3;
        let mut out0 = Vec::new();
        let mut out1 = Vec::new();
        for seed in 0..500u64 {
            let w = WeightVector::uniform(2);
            let mut cal = calibrate(&[shared.clone(), shared.clone()], w, 1e-6, seed).unwrap();
            out0.push(cal.transform(x, 0).unwrap());
            out1.push(cal.transform(x, 1).unwrap());
        }
        let d0 = Distribution1D::empirical_uniform(&out0).unwrap();
        let d1 = Distribution1D::empirical_uniform(&out1).unwrap();
        let ks = ks_distance(&d0, &d1);
        let threshold = 1.63 * (2.0 / 500.0f64).sqrt();
        assert!(ks < threshold, "ks {ks} threshold {threshold}");
    }

    #[test]
    fn two_sample_ks_of_transformed_groups_is_small() {
        // Different base laws, transformed outputs equal in law. The
        // equality covers the calibration randomness too (conditioning on
        // one calibration leaves an O(N^{-1/2}) gap), so the sample pools
        // transforms across independent calibrations.
        let eval_per_cal = 100usize;
        let cals = 30usize;
        let mut out0 = Vec::new();
        let mut out1 = Vec::new();
        for c in 0..cals {
            let seed = rng::substream_seed(123, c as u64);
            let mut r = rng::derive_rng(seed, 50);
            let g0: Vec<f64> = (0..400).map(|_| rng::standard_normal::<f64, _>(&mut r)).collect();
            let g1: Vec<f64> = (0..400)
                .map(|_| 3.0 + 0.5 * rng::standard_normal::<f64, _>(&mut r))
                .collect();
            let w = WeightVector::uniform(2);
            let mut cal = calibrate(&[g0, g1], w, 1e-6, seed).unwrap();
            let mut fresh = rng::derive_rng(seed, 51);
            for _ in 0..eval_per_cal {
                let x0 = rng::standard_normal::<f64, _>(&mut fresh);
                let x1 = 3.0 + 0.5 * rng::standard_normal::<f64, _>(&mut fresh);
                out0.push(cal.transform(x0, 0).unwrap());
                out1.push(cal.transform(x1, 1).unwrap());
            }
        }
        let d0 = Distribution1D::empirical_uniform(&out0).unwrap();
        let d1 = Distribution1D::empirical_uniform(&out1).unwrap();
        let ks = ks_distance(&d0, &d1);
        let n = (eval_per_cal * cals) as f64;
        let threshold = 1.63 * (2.0 / n).sqrt();
        assert!(ks < threshold, "ks {ks} threshold {threshold}");
    }

    #[test]
    fn works_in_single_precision() {
        let w = WeightVector::<f32>::uniform(2);
        let groups = vec![vec![0.0f32, 1.0, 2.0, 3.0], vec![5.0, 6.0, 7.0, 8.0]];
        let mut cal = calibrate(&groups, w, 1e-4, 3).unwrap();
        let y = cal.predict_alpha(1.5f32, 0, 0.25).unwrap();
        assert!(y.is_finite());
    }

    #[test]
    fn rank_statistic_uniform_smoke() {
        let law = Distribution1D::gaussian(0.0, 1.0).unwrap();
        let report = rank_uniformity_test(1, &law, 2_000, 3).unwrap();
        assert!(report.pass, "ks {}", report.ks_statistic);
        // degenerate law: T = U exactly
        let point = Distribution1D::point_mass(0.0);
        let report = rank_uniformity_test(5, &point, 2_000, 4).unwrap();
        assert!(report.pass);
        assert!(rank_uniformity_test(0, &point, 2_000, 0).is_err());
        assert!(rank_uniformity_test(1, &point, 10, 0).is_err());
    }
}
