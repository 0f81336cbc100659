//! Population-level objects: the family of partially fair optimal
//! predictors indexed by the improvement ratio `alpha`, its closed-form
//! risk/unfairness trade-off curve, the penalty-to-constraint
//! correspondence, Pareto dominance, and a desk-scale checker for the
//! geodesic contraction argument backing the whole construction.
//!
//! For `alpha` in `[0, 1]` the optimal predictor with unfairness at most
//! `alpha` times that of the regression function is the pointwise convex
//! combination `alpha^{1/q} f + (1 - alpha^{1/q}) T(f)` of the regression
//! value and its transport to the group barycenter; its risk is
//! `(1 - alpha^{1/q})^q * U_q(f)` and its unfairness `alpha * U_q(f)`.

use rand::Rng;

use crate::dist1d::{transport_map_to_barycenter, Distribution1D, WeightVector};
use crate::error::{Error, Result};
use crate::fairness::unfairness_of_distributions;
use crate::rng::{derive_rng, standard_normal, uniform_01};
use crate::scalar::Real;

/// Known group-wise laws of the regression values plus group weights.
#[derive(Debug, Clone)]
pub struct OracleModel<F> {
    dists: Vec<Distribution1D<F>>,
    weights: WeightVector<F>,
}

impl<F: Real> OracleModel<F> {
    /// Requires effectively non-atomic group laws: Gaussians with positive
    /// spread, empirical laws with at least two distinct support points.
    pub fn new(dists: Vec<Distribution1D<F>>, weights: WeightVector<F>) -> Result<Self> {
        if dists.is_empty() {
            return Err(Error::empty("oracle model needs at least one group"));
        }
        if dists.len() != weights.len() {
            return Err(Error::weights("one weight per group distribution"));
        }
        for (s, d) in dists.iter().enumerate() {
            if let Some((_, stddev)) = d.gaussian_params() {
                if stddev <= F::zero() {
                    return Err(Error::domain(format!(
                        "group {s}: gaussian law must have positive stddev"
                    )));
                }
            }
            if let Some((values, _)) = d.atoms() {
                if values.len() < 2 {
                    return Err(Error::domain(format!(
                        "group {s}: empirical law needs >= 2 distinct support points"
                    )));
                }
            }
        }
        Ok(OracleModel { dists, weights })
    }

    pub fn group_count(&self) -> usize {
        self.dists.len()
    }

    pub fn distributions(&self) -> &[Distribution1D<F>] {
        &self.dists
    }

    pub fn weights(&self) -> &WeightVector<F> {
        &self.weights
    }

    /// `U_q` of the regression function under this model.
    pub fn unfairness(&self, q: F, grid: usize) -> Result<F> {
        unfairness_of_distributions(&self.dists, &self.weights, q, grid)
    }
}

/// One point of the risk–unfairness trade-off curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffPoint<F> {
    pub alpha: F,
    pub risk: F,
    pub unfairness: F,
}

fn alpha_root<F: Real>(alpha: F, q: F) -> F {
    if q == F::of(2.0) {
        alpha.sqrt()
    } else if q == F::one() {
        alpha
    } else {
        alpha.powf(F::one() / q)
    }
}

fn validate_alpha<F: Real>(alpha: F) -> Result<()> {
    if !(alpha >= F::zero() && alpha <= F::one()) {
        return Err(Error::domain(format!(
            "improvement ratio alpha = {alpha} outside [0, 1]"
        )));
    }
    Ok(())
}

/// Value of the optimal alpha-improved predictor at a point with
/// regression value `base_value` in group `group`:
/// `alpha^{1/q} v + (1 - alpha^{1/q}) T_group(v)` where `T` is the
/// transport map to the q-barycenter of the group laws.
pub fn oracle_prediction<F: Real>(
    model: &OracleModel<F>,
    alpha: F,
    group: usize,
    base_value: F,
    q: F,
) -> Result<F> {
    validate_alpha(alpha)?;
    let fair = transport_map_to_barycenter(&model.dists, &model.weights, group, q, base_value)?;
    let a = alpha_root(alpha, q);
    Ok(a * base_value + (F::one() - a) * fair)
}

/// Closed-form trade-off curve: for each alpha,
/// `risk = (1 - alpha^{1/q})^q * U_q` and `unfairness = alpha * U_q`.
pub fn tradeoff_curve<F: Real>(
    model: &OracleModel<F>,
    alphas: &[F],
    q: F,
    grid: usize,
) -> Result<Vec<TradeoffPoint<F>>> {
    let u = model.unfairness(q, grid)?;
    alphas
        .iter()
        .map(|&alpha| {
            validate_alpha(alpha)?;
            let a = alpha_root(alpha, q);
            let risk = if q == F::of(2.0) {
                let r = F::one() - a;
                r * r * u
            } else if q == F::one() {
                (F::one() - a) * u
            } else {
                (F::one() - a).powf(q) * u
            };
            Ok(TradeoffPoint {
                alpha,
                risk,
                unfairness: alpha * u,
            })
        })
        .collect()
}

/// Constraint level equivalent to the penalty strength `lambda`:
/// `alpha(lambda) = (1 + lambda)^{-2}`.
pub fn alpha_from_lambda<F: Real>(lambda: F) -> Result<F> {
    if !(lambda >= F::zero()) {
        return Err(Error::domain(format!(
            "penalty strength lambda = {lambda} must be >= 0"
        )));
    }
    let denom = F::one() + lambda;
    Ok(F::one() / (denom * denom))
}

/// Strict Pareto dominance of `p1` over `p2` in the (risk, unfairness)
/// plane: at least as good on both coordinates, strictly better on one.
pub fn pareto_dominates<F: Real>(p1: &TradeoffPoint<F>, p2: &TradeoffPoint<F>) -> bool {
    (p1.risk <= p2.risk && p1.unfairness < p2.unfairness)
        || (p1.risk < p2.risk && p1.unfairness <= p2.unfairness)
}

/// Outcome of [`check_geodesic_contraction`].
#[derive(Debug, Clone, Copy)]
pub struct ContractionReport<F> {
    /// `|sum_s w_s ||b_s - C_b||^2 - alpha * sum_s w_s ||a_s - C_a||^2|`.
    pub constraint_gap: F,
    /// Whether the gap is within `1e-9` (scaled to the point spread).
    pub constraint_satisfied: bool,
    /// Objective of the geodesic construction, `sum_s w_s ||b_s - a_s||^2`.
    pub objective: F,
    /// Best objective over the random feasible candidates.
    pub best_candidate_objective: F,
    /// How far a candidate beat the construction (0 when none did).
    pub objective_gap: F,
}

/// Desk check of the geodesic contraction argument in Euclidean space:
/// walking each point `a_s` a fraction `1 - sqrt(alpha)` of the way to the
/// weighted mean gives the cheapest configuration whose spread around its
/// own mean is an `alpha` fraction of the original spread. The optimality
/// side is probed with `candidates` random feasible perturbations.
pub fn check_geodesic_contraction<F: Real>(
    points: &[Vec<F>],
    weights: &WeightVector<F>,
    alpha: F,
    candidates: usize,
    seed: u64,
) -> Result<ContractionReport<F>> {
    validate_alpha(alpha)?;
    let k = points.len();
    if k < 2 {
        return Err(Error::domain("contraction check needs >= 2 points"));
    }
    if k != weights.len() {
        return Err(Error::weights("one weight per point required"));
    }
    let dim = points[0].len();
    if dim == 0 || points.iter().any(|p| p.len() != dim) {
        return Err(Error::domain("points must share a positive dimension"));
    }
    let w = weights.as_slice();

    let center = weighted_mean(points, w, dim);
    let spread_a = weighted_spread(points, w, &center);

    let shrink = F::one() - alpha.sqrt();
    let contracted: Vec<Vec<F>> = points
        .iter()
        .map(|p| {
            (0..dim)
                .map(|d| p[d] + shrink * (center[d] - p[d]))
                .collect()
        })
        .collect();
    let center_b = weighted_mean(&contracted, w, dim);
    let spread_b = weighted_spread(&contracted, w, &center_b);

    let target = alpha * spread_a;
    let constraint_gap = (spread_b - target).abs();
    let constraint_satisfied = constraint_gap <= F::of(1e-9) * F::one().max(spread_a);

    let objective = pair_objective(&contracted, points, w);

    // Random feasible candidates: perturb the construction at a range of
    // scales, then contract toward the candidate's own mean until the
    // spread constraint holds with equality.
    let mut rng = derive_rng(seed, 0);
    let mut best = F::infinity();
    let mut candidate = vec![vec![F::zero(); dim]; k];
    for _ in 0..candidates {
        let log_scale = F::of(-4.0) + F::of(4.3) * uniform_01::<F, _>(&mut rng);
        let scale = F::of(10.0).powf(log_scale);
        for (c, b) in candidate.iter_mut().zip(&contracted) {
            for d in 0..dim {
                c[d] = b[d] + scale * standard_normal::<F, _>(&mut rng);
            }
        }
        let c_mean = weighted_mean(&candidate, w, dim);
        let c_spread = weighted_spread(&candidate, w, &c_mean);
        if c_spread > target {
            let factor = if c_spread > F::zero() {
                (target / c_spread).sqrt()
            } else {
                F::zero()
            };
            for c in candidate.iter_mut() {
                for d in 0..dim {
                    c[d] = c_mean[d] + factor * (c[d] - c_mean[d]);
                }
            }
        }
        best = best.min(pair_objective(&candidate, points, w));
    }

    Ok(ContractionReport {
        constraint_gap,
        constraint_satisfied,
        objective,
        best_candidate_objective: best,
        objective_gap: (objective - best).max(F::zero()),
    })
}

fn weighted_mean<F: Real>(points: &[Vec<F>], w: &[F], dim: usize) -> Vec<F> {
    let mut mean = vec![F::zero(); dim];
    for (p, &ws) in points.iter().zip(w) {
        for d in 0..dim {
            mean[d] += ws * p[d];
        }
    }
    mean
}

fn weighted_spread<F: Real>(points: &[Vec<F>], w: &[F], center: &[F]) -> F {
    let mut acc = F::zero();
    for (p, &ws) in points.iter().zip(w) {
        let mut sq = F::zero();
        for (d, &c) in center.iter().enumerate() {
            let diff = p[d] - c;
            sq += diff * diff;
        }
        acc += ws * sq;
    }
    acc
}

fn pair_objective<F: Real>(xs: &[Vec<F>], ys: &[Vec<F>], w: &[F]) -> F {
    let mut acc = F::zero();
    for ((x, y), &ws) in xs.iter().zip(ys).zip(w) {
        let mut sq = F::zero();
        for (d, &yd) in y.iter().enumerate() {
            let diff = x[d] - yd;
            sq += diff * diff;
        }
        acc += ws * sq;
    }
    acc
}

/// Gaussian two-group model helper used across tests and the CLI checks.
pub fn gaussian_model<F: Real>(
    params: &[(F, F)],
    weights: WeightVector<F>,
) -> Result<OracleModel<F>> {
    let dists = params
        .iter()
        .map(|&(m, s)| Distribution1D::gaussian(m, s))
        .collect::<Result<Vec<_>>>()?;
    OracleModel::new(dists, weights)
}

/// Sample a random point from group `s` of the model (by its law).
pub fn sample_group_value<F: Real, R: Rng + ?Sized>(
    model: &OracleModel<F>,
    group: usize,
    rng: &mut R,
) -> F {
    model.dists[group].sample(rng)
}
