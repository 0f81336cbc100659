//! Unfairness functionals, their finite-sample estimators, and the weighted
//! risk statistics used to score predictors.
//!
//! The unfairness of a predictor is the weighted sum of q-th-power
//! Wasserstein distances from the group-wise prediction laws to their
//! common q-barycenter (squared distances for `q = 2`). It vanishes exactly
//! when every group induces the same distribution, i.e. under demographic
//! parity, scales quadratically under prediction rescaling, and is
//! translation invariant. The Kolmogorov–Smirnov variant sums each group's
//! KS distance to the weighted mixture; a total-variation analogue exists
//! (sum of TV distances to the mixture) but is scale-insensitive and very
//! brittle under small perturbations, so no estimator is provided for it.
//!
//! Everything here is a pure function over immutable inputs and safe to
//! call concurrently.

use crate::dist1d::{self, ks_distance, Distribution1D, WeightVector};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Per-group arrays of predicted values.
#[derive(Debug, Clone)]
pub struct GroupedPredictions<F> {
    groups: Vec<Vec<F>>,
}

impl<F: Real> GroupedPredictions<F> {
    pub fn new(groups: Vec<Vec<F>>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::empty("need at least one group"));
        }
        for (s, g) in groups.iter().enumerate() {
            if g.is_empty() {
                return Err(Error::empty(format!("group {s} has no predictions")));
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain(format!("group {s} has non-finite values")));
            }
        }
        Ok(GroupedPredictions { groups })
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn group(&self, s: usize) -> &[F] {
        &self.groups[s]
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    /// Uniform-mass empirical law of each group.
    pub fn distributions(&self) -> Result<Vec<Distribution1D<F>>> {
        self.groups
            .iter()
            .map(|g| Distribution1D::empirical_uniform(g))
            .collect()
    }
}

/// Per-group paired `(prediction, target)` arrays.
#[derive(Debug, Clone)]
pub struct GroupedPairs<F> {
    groups: Vec<Vec<(F, F)>>,
}

impl<F: Real> GroupedPairs<F> {
    pub fn new(groups: Vec<Vec<(F, F)>>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::empty("need at least one group"));
        }
        for (s, g) in groups.iter().enumerate() {
            if g.is_empty() {
                return Err(Error::empty(format!("group {s} has no pairs")));
            }
            if g.iter().any(|(p, y)| !p.is_finite() || !y.is_finite()) {
                return Err(Error::domain(format!("group {s} has non-finite pairs")));
            }
        }
        Ok(GroupedPairs { groups })
    }

    /// Zip per-group prediction and target arrays of equal length.
    pub fn from_arrays(predictions: &[Vec<F>], targets: &[Vec<F>]) -> Result<Self> {
        if predictions.len() != targets.len() {
            return Err(Error::domain("prediction and target group counts differ"));
        }
        let mut groups = Vec::with_capacity(predictions.len());
        for (s, (p, y)) in predictions.iter().zip(targets).enumerate() {
            if p.len() != y.len() {
                return Err(Error::domain(format!(
                    "group {s}: {} predictions vs {} targets",
                    p.len(),
                    y.len()
                )));
            }
            groups.push(p.iter().copied().zip(y.iter().copied()).collect());
        }
        GroupedPairs::new(groups)
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn group(&self, s: usize) -> &[(F, F)] {
        &self.groups[s]
    }
}

/// The three canonical group-weight choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightScheme {
    /// `w_s = n_s / n`.
    Proportional,
    /// `w_s` proportional to `1 / n_s`.
    Inverse,
    /// `w_s = 1 / K`.
    Equal,
}

/// Build a weight vector from group counts under the named scheme.
pub fn weights_from_counts<F: Real>(
    scheme: WeightScheme,
    counts: &[usize],
) -> Result<WeightVector<F>> {
    if counts.is_empty() {
        return Err(Error::empty("need at least one group count"));
    }
    if counts.contains(&0) {
        return Err(Error::domain("group counts must be positive"));
    }
    let raw: Vec<F> = match scheme {
        WeightScheme::Proportional => {
            let n: usize = counts.iter().sum();
            counts
                .iter()
                .map(|&c| F::of_usize(c) / F::of_usize(n))
                .collect()
        }
        WeightScheme::Inverse => counts.iter().map(|&c| F::one() / F::of_usize(c)).collect(),
        WeightScheme::Equal => vec![F::one() / F::of_usize(counts.len()); counts.len()],
    };
    let total: F = raw.iter().copied().sum();
    WeightVector::new(raw.into_iter().map(|w| w / total).collect())
}

/// Unfairness of a family of group distributions: the attained barycenter
/// objective `sum_s w_s W_q^q(nu_s, bar{nu})`. Exact for all-Gaussian
/// inputs at `q = 2` and for purely atomic inputs; `grid` only controls
/// Gaussian discretization in the remaining mixed cases.
pub fn unfairness_of_distributions<F: Real>(
    dists: &[Distribution1D<F>],
    weights: &WeightVector<F>,
    q: F,
    grid: usize,
) -> Result<F> {
    dist1d::barycenter_objective(dists, weights, q, grid)
}

/// Unfairness of grouped predictions through their empirical laws.
pub fn unfairness<F: Real>(
    preds: &GroupedPredictions<F>,
    weights: &WeightVector<F>,
    q: F,
    grid: usize,
) -> Result<F> {
    let dists = preds.distributions()?;
    unfairness_of_distributions(&dists, weights, q, grid)
}

/// Finite-sample unfairness estimator: quadrature of the pointwise
/// barycenter objective over `grid` quantile midpoints,
/// `(1/grid) * sum_j min_y sum_s w_s |Fhat_s^{-1}(t_j) - y|^q`.
///
/// Midpoints avoid the boundary sensitivity of `Fhat^{-1}` near 0 and 1.
/// The exponent is a parameter; `q = 2` (the default used by callers)
/// estimates the squared-distance unfairness functional.
pub fn unfairness_estimate<F: Real>(
    preds: &GroupedPredictions<F>,
    weights: &WeightVector<F>,
    q: F,
    grid: usize,
) -> Result<F> {
    if !(q >= F::one()) {
        return Err(Error::domain(format!("estimator order q = {q} must be >= 1")));
    }
    if grid < 2 {
        return Err(Error::domain("estimator grid must have >= 2 points"));
    }
    if preds.group_count() != weights.len() {
        return Err(Error::weights("one weight per group required"));
    }
    let dists = preds.distributions()?;
    let w = weights.as_slice();
    let g = F::of_usize(grid);
    let mut quantiles = vec![F::zero(); dists.len()];
    let mut acc = F::zero();
    for j in 0..grid {
        let t = (F::of_usize(j) + F::of(0.5)) / g;
        for (s, d) in dists.iter().enumerate() {
            quantiles[s] = d.quantile(t)?;
        }
        let y = dist1d::pointwise_barycenter(&quantiles, w, q);
        let obj: F = quantiles
            .iter()
            .zip(w)
            .map(|(&p, &ws)| {
                let d = (p - y).abs();
                if q == F::of(2.0) {
                    ws * d * d
                } else if q == F::one() {
                    ws * d
                } else {
                    ws * d.powf(q)
                }
            })
            .sum();
        acc += obj;
    }
    Ok(acc / g)
}

/// Kolmogorov–Smirnov unfairness of grouped predictions:
/// `sum_s KS(nu_s, nu_mix)` against the w-weighted empirical mixture.
pub fn ks_unfairness<F: Real>(
    preds: &GroupedPredictions<F>,
    weights: &WeightVector<F>,
) -> Result<F> {
    let dists = preds.distributions()?;
    ks_unfairness_of_distributions(&dists, weights)
}

/// KS unfairness for explicit group distributions. Exact for atomic
/// inputs; families with Gaussian components are scanned on a dense grid.
pub fn ks_unfairness_of_distributions<F: Real>(
    dists: &[Distribution1D<F>],
    weights: &WeightVector<F>,
) -> Result<F> {
    if dists.is_empty() {
        return Err(Error::empty("KS unfairness of no distributions"));
    }
    if dists.len() != weights.len() {
        return Err(Error::weights("one weight per distribution required"));
    }
    if dists.iter().all(|d| d.atoms().is_some()) {
        let mix = empirical_mixture(dists, weights)?;
        return Ok(dists.iter().map(|d| ks_distance(d, &mix)).sum());
    }
    // Continuous components: scan sup_t |F_s(t) - F_mix(t)| over the joint
    // span (plus refinement), with atoms of any empirical component added
    // as explicit candidates through their jump positions.
    let (mut lo, mut hi) = (F::infinity(), F::neg_infinity());
    for d in dists {
        if let Some((values, _)) = d.atoms() {
            lo = lo.min(values[0]);
            hi = hi.max(*values.last().expect("non-empty"));
        }
        if let Some((m, s)) = d.gaussian_params() {
            lo = lo.min(m - F::of(8.0) * s);
            hi = hi.max(m + F::of(8.0) * s);
        }
    }
    let mix_cdf = |t: F| -> F {
        dists
            .iter()
            .zip(weights.as_slice())
            .map(|(d, &w)| w * d.cdf(t))
            .sum()
    };
    let mut total = F::zero();
    for d in dists {
        let mut sup = dist1d::ks_scan(|t| (d.cdf(t) - mix_cdf(t)).abs(), lo, hi);
        if let Some((values, _)) = d.atoms() {
            for &v in values {
                sup = sup.max((d.cdf(v) - mix_cdf(v)).abs());
            }
        }
        total += sup;
    }
    Ok(total)
}

/// w-weighted mixture of empirical distributions.
fn empirical_mixture<F: Real>(
    dists: &[Distribution1D<F>],
    weights: &WeightVector<F>,
) -> Result<Distribution1D<F>> {
    let mut values = Vec::new();
    let mut masses = Vec::new();
    for (d, &w) in dists.iter().zip(weights.as_slice()) {
        let (vs, ms) = d
            .atoms()
            .ok_or_else(|| Error::domain("mixture needs empirical components"))?;
        for (&v, &m) in vs.iter().zip(ms) {
            values.push(v);
            masses.push(w * m);
        }
    }
    // Renormalize to absorb the accumulated rounding of w_s * m_i sums.
    let total: F = masses.iter().copied().sum();
    for m in &mut masses {
        *m /= total;
    }
    Distribution1D::empirical(values, masses)
}

/// Weighted mean-squared error `sum_s w_s * mean_i (y_i - f_i)^2`.
pub fn weighted_mse<F: Real>(pairs: &GroupedPairs<F>, weights: &WeightVector<F>) -> Result<F> {
    if pairs.group_count() != weights.len() {
        return Err(Error::weights("one weight per group required"));
    }
    let mut acc = F::zero();
    for (s, &w) in weights.as_slice().iter().enumerate() {
        let g = pairs.group(s);
        let mse: F = g
            .iter()
            .map(|&(f, y)| {
                let d = y - f;
                d * d
            })
            .sum::<F>()
            / F::of_usize(g.len());
        acc += w * mse;
    }
    Ok(acc)
}

/// Per-group mean predictions, used for reporting.
pub fn group_means<F: Real>(preds: &GroupedPredictions<F>) -> Vec<F> {
    (0..preds.group_count())
        .map(|s| {
            let g = preds.group(s);
            g.iter().copied().sum::<F>() / F::of_usize(g.len())
        })
        .collect()
}
