//! Univariate distributions and one-dimensional optimal transport.
//!
//! On the real line the q-Wasserstein distance is the L_q distance between
//! quantile functions and barycenters are characterized quantile by
//! quantile, so everything here reduces to CDF / quantile manipulation.
//! Empirical–empirical computations are exact (merged quantile grids);
//! Gaussians keep their closed forms where they exist (`q = 2` distance and
//! barycenter) and are discretized on a quantile midpoint grid only when an
//! operation mixes variants.
//!
//! All values are immutable after construction and every operation is pure,
//! so the types can be shared freely across threads.

use std::borrow::Cow;

use rand::Rng;

use crate::error::{Error, Result};
use crate::normal::{std_normal_cdf, std_normal_quantile};
use crate::rng;
use crate::scalar::Real;

/// Quantile-grid resolution used when a Gaussian must be discretized.
pub const DEFAULT_GRID: usize = 10_000;

/// Probability vector over the sensitive groups.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector<F> {
    w: Vec<F>,
}

impl<F: Real> WeightVector<F> {
    /// Validates non-negativity and normalization.
    pub fn new(w: Vec<F>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::weights("need at least one group"));
        }
        if w.iter().any(|x| !x.is_finite() || *x < F::zero()) {
            return Err(Error::weights("weights must be finite and non-negative"));
        }
        let sum: F = w.iter().copied().sum();
        if (sum - F::one()).abs() > F::mass_tolerance() {
            return Err(Error::weights(format!("weights sum to {sum}, expected 1")));
        }
        Ok(WeightVector { w })
    }

    pub fn uniform(k: usize) -> Self {
        let share = F::one() / F::of_usize(k.max(1));
        WeightVector {
            w: vec![share; k.max(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn as_slice(&self) -> &[F] {
        &self.w
    }

    pub fn get(&self, s: usize) -> F {
        self.w[s]
    }
}

/// Sorted atoms with positive masses and a precomputed CDF.
#[derive(Debug, Clone, PartialEq)]
struct Atoms<F> {
    values: Vec<F>,
    masses: Vec<F>,
    cumulative: Vec<F>,
}

impl<F: Real> Atoms<F> {
    /// `values` already sorted, ties merged, cumulative ending at one.
    fn from_merged(values: Vec<F>, masses: Vec<F>, cumulative: Vec<F>) -> Self {
        debug_assert_eq!(values.len(), masses.len());
        debug_assert_eq!(values.len(), cumulative.len());
        Atoms {
            values,
            masses,
            cumulative,
        }
    }

    fn cdf(&self, t: F) -> F {
        let k = self.values.partition_point(|&v| v <= t);
        if k == 0 {
            F::zero()
        } else {
            self.cumulative[k - 1]
        }
    }

    fn quantile(&self, t: F) -> F {
        // inf{x : F(x) >= t}; the tolerance absorbs cumulative-sum rounding.
        let cutoff = t - F::mass_tolerance();
        let idx = self.cumulative.partition_point(|&c| c < cutoff);
        self.values[idx.min(self.values.len() - 1)]
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Repr<F> {
    Atoms(Atoms<F>),
    Gaussian { mean: F, stddev: F },
}

/// An empirical (finitely supported) or Gaussian distribution on the line,
/// exposing its CDF and generalized-inverse quantile function.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution1D<F> {
    repr: Repr<F>,
}

impl<F: Real> Distribution1D<F> {
    /// Empirical distribution from (value, mass) pairs. Values are sorted,
    /// duplicates merged by summing masses; masses must be positive and sum
    /// to one within `1e-12`.
    pub fn empirical(values: Vec<F>, masses: Vec<F>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::empty("empirical distribution needs atoms"));
        }
        if values.len() != masses.len() {
            return Err(Error::domain("values and masses length mismatch"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("empirical values must be finite"));
        }
        if masses.iter().any(|m| !m.is_finite() || *m <= F::zero()) {
            return Err(Error::domain("empirical masses must be positive"));
        }
        let mut pairs: Vec<(F, F)> = values.into_iter().zip(masses).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));

        let mut vs: Vec<F> = Vec::with_capacity(pairs.len());
        let mut ms: Vec<F> = Vec::with_capacity(pairs.len());
        for (v, m) in pairs {
            match vs.last() {
                Some(&last) if last == v => *ms.last_mut().expect("non-empty") += m,
                _ => {
                    vs.push(v);
                    ms.push(m);
                }
            }
        }
        let total: F = ms.iter().copied().sum();
        if (total - F::one()).abs() > F::mass_tolerance() {
            return Err(Error::domain(format!(
                "empirical masses sum to {total}, expected 1"
            )));
        }
        let mut cumulative = Vec::with_capacity(ms.len());
        let mut acc = F::zero();
        for &m in &ms {
            acc += m;
            cumulative.push(acc);
        }
        *cumulative.last_mut().expect("non-empty") = F::one();
        Ok(Distribution1D {
            repr: Repr::Atoms(Atoms::from_merged(vs, ms, cumulative)),
        })
    }

    /// Uniform-mass empirical distribution of a sample.
    pub fn empirical_uniform(samples: &[F]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::empty("empirical distribution needs samples"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("samples must be finite"));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        let n = sorted.len();
        let inv_n = F::one() / F::of_usize(n);

        let mut vs = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for v in sorted {
            match vs.last() {
                Some(&last) if last == v => *counts.last_mut().expect("non-empty") += 1,
                _ => {
                    vs.push(v);
                    counts.push(1);
                }
            }
        }
        let mut masses = Vec::with_capacity(vs.len());
        let mut cumulative = Vec::with_capacity(vs.len());
        let mut running = 0usize;
        for &c in &counts {
            running += c;
            masses.push(F::of_usize(c) * inv_n);
            cumulative.push(F::of_usize(running) / F::of_usize(n));
        }
        *cumulative.last_mut().expect("non-empty") = F::one();
        Ok(Distribution1D {
            repr: Repr::Atoms(Atoms::from_merged(vs, masses, cumulative)),
        })
    }

    /// Point mass at `x`.
    pub fn point_mass(x: F) -> Self {
        Distribution1D {
            repr: Repr::Atoms(Atoms::from_merged(vec![x], vec![F::one()], vec![F::one()])),
        }
    }

    /// Gaussian law; `stddev = 0` degenerates to a point mass CDF.
    pub fn gaussian(mean: F, stddev: F) -> Result<Self> {
        if !mean.is_finite() || !stddev.is_finite() || stddev < F::zero() {
            return Err(Error::domain("gaussian needs finite mean and stddev >= 0"));
        }
        Ok(Distribution1D {
            repr: Repr::Gaussian { mean, stddev },
        })
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.repr, Repr::Gaussian { .. })
    }

    /// `(mean, stddev)` when the distribution is Gaussian.
    pub fn gaussian_params(&self) -> Option<(F, F)> {
        match self.repr {
            Repr::Gaussian { mean, stddev } => Some((mean, stddev)),
            _ => None,
        }
    }

    /// `(values, masses)` when the distribution is empirical.
    pub fn atoms(&self) -> Option<(&[F], &[F])> {
        match &self.repr {
            Repr::Atoms(a) => Some((&a.values, &a.masses)),
            _ => None,
        }
    }

    /// Right-continuous CDF.
    pub fn cdf(&self, t: F) -> F {
        match &self.repr {
            Repr::Atoms(a) => a.cdf(t),
            Repr::Gaussian { mean, stddev } => {
                if *stddev == F::zero() {
                    if t >= *mean {
                        F::one()
                    } else {
                        F::zero()
                    }
                } else {
                    std_normal_cdf((t - *mean) / *stddev)
                }
            }
        }
    }

    /// Generalized inverse `inf{x : F(x) >= t}` for `t` in `(0, 1]`;
    /// `t = 1` returns the supremum of the support (infinite for a
    /// non-degenerate Gaussian).
    pub fn quantile(&self, t: F) -> Result<F> {
        if !(t > F::zero() && t <= F::one()) {
            return Err(Error::domain(format!("quantile level {t} outside (0, 1]")));
        }
        Ok(match &self.repr {
            Repr::Atoms(a) => a.quantile(t),
            Repr::Gaussian { mean, stddev } => {
                if *stddev == F::zero() {
                    *mean
                } else if t == F::one() {
                    F::infinity()
                } else {
                    *mean + *stddev * std_normal_quantile(t)
                }
            }
        })
    }

    /// Expected value.
    pub fn mean(&self) -> F {
        match &self.repr {
            Repr::Atoms(a) => a
                .values
                .iter()
                .zip(&a.masses)
                .map(|(&v, &m)| v * m)
                .sum(),
            Repr::Gaussian { mean, .. } => *mean,
        }
    }

    /// One draw from the distribution.
    pub fn sample<R: Rng + ?Sized>(&self, rng_source: &mut R) -> F {
        match &self.repr {
            Repr::Atoms(a) => {
                let u: F = rng::uniform_01_open_low(rng_source);
                let idx = a.cumulative.partition_point(|&c| c < u);
                a.values[idx.min(a.values.len() - 1)]
            }
            Repr::Gaussian { mean, stddev } => {
                *mean + *stddev * rng::standard_normal::<F, R>(rng_source)
            }
        }
    }

    /// Interval that carries (essentially) all mass; used for scan grids.
    fn span(&self) -> (F, F) {
        match &self.repr {
            Repr::Atoms(a) => (a.values[0], *a.values.last().expect("non-empty")),
            Repr::Gaussian { mean, stddev } => {
                let eight = F::of(8.0);
                (*mean - eight * *stddev, *mean + eight * *stddev)
            }
        }
    }

    /// Atom view, discretizing a Gaussian on `grid` quantile midpoints.
    fn discretized(&self, grid: usize) -> Result<Cow<'_, Atoms<F>>> {
        match &self.repr {
            Repr::Atoms(a) => Ok(Cow::Borrowed(a)),
            Repr::Gaussian { mean, stddev } => {
                if *stddev == F::zero() {
                    return Ok(Cow::Owned(Atoms::from_merged(
                        vec![*mean],
                        vec![F::one()],
                        vec![F::one()],
                    )));
                }
                if grid < 2 {
                    return Err(Error::domain("discretization grid must have >= 2 points"));
                }
                let g = F::of_usize(grid);
                let mut values = Vec::with_capacity(grid);
                let mut masses = Vec::with_capacity(grid);
                let mut cumulative = Vec::with_capacity(grid);
                for j in 0..grid {
                    let t = (F::of_usize(j) + F::of(0.5)) / g;
                    values.push(*mean + *stddev * std_normal_quantile(t));
                    masses.push(F::one() / g);
                    cumulative.push(F::of_usize(j + 1) / g);
                }
                *cumulative.last_mut().expect("grid >= 2") = F::one();
                Ok(Cow::Owned(Atoms::from_merged(values, masses, cumulative)))
            }
        }
    }
}

/// `|d|^q` with exact fast paths for the common exponents.
fn abs_pow<F: Real>(d: F, q: F) -> F {
    let a = d.abs();
    if q == F::of(2.0) {
        a * a
    } else if q == F::one() {
        a
    } else {
        a.powf(q)
    }
}

fn root_q<F: Real>(x: F, q: F) -> F {
    if q == F::of(2.0) {
        x.sqrt()
    } else if q == F::one() {
        x
    } else {
        x.powf(F::one() / q)
    }
}

/// Golden-section minimizer for a convex objective on `[lo, hi]`.
fn golden_min<F: Real>(mut lo: F, mut hi: F, f: impl Fn(F) -> F) -> F {
    let tol = F::of(1e-10).max(F::epsilon() * (hi - lo).abs() * F::of(8.0));
    if hi - lo <= tol {
        return (lo + hi) / F::of(2.0);
    }
    let inv_phi = F::of(0.618_033_988_749_894_8);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    (lo + hi) / F::of(2.0)
}

/// Minimizer of `y -> sum_s w_s |p_s - y|^q`: weighted mean for `q = 2`,
/// lower weighted median for `q = 1`, golden-section search otherwise.
pub(crate) fn pointwise_barycenter<F: Real>(points: &[F], weights: &[F], q: F) -> F {
    debug_assert_eq!(points.len(), weights.len());
    if points.len() == 1 {
        return points[0];
    }
    if q == F::of(2.0) {
        return points
            .iter()
            .zip(weights)
            .map(|(&p, &w)| p * w)
            .sum::<F>();
    }
    if q == F::one() {
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&i, &j| points[i].partial_cmp(&points[j]).expect("finite"));
        let half = F::of(0.5);
        let mut acc = F::zero();
        for &i in &order {
            acc += weights[i];
            if acc >= half - F::mass_tolerance() {
                return points[i];
            }
        }
        return points[order[order.len() - 1]];
    }
    let lo = points.iter().copied().fold(F::infinity(), F::min);
    let hi = points.iter().copied().fold(F::neg_infinity(), F::max);
    if lo == hi {
        return lo;
    }
    golden_min(lo, hi, |y| {
        points
            .iter()
            .zip(weights)
            .map(|(&p, &w)| w * abs_pow(p - y, q))
            .sum()
    })
}

fn validate_order<F: Real>(q: F) -> Result<()> {
    if !(q >= F::one()) {
        return Err(Error::domain(format!("transport order q = {q} must be >= 1")));
    }
    Ok(())
}

/// `W_q(a, b)` with the default Gaussian discretization grid.
pub fn wasserstein<F: Real>(a: &Distribution1D<F>, b: &Distribution1D<F>, q: F) -> Result<F> {
    wasserstein_with_grid(a, b, q, DEFAULT_GRID)
}

/// `W_q(a, b)`; `grid` controls Gaussian discretization in mixed cases.
pub fn wasserstein_with_grid<F: Real>(
    a: &Distribution1D<F>,
    b: &Distribution1D<F>,
    q: F,
    grid: usize,
) -> Result<F> {
    Ok(root_q(wasserstein_pow_with_grid(a, b, q, grid)?, q))
}

/// `W_q^q(a, b)`, the q-th power of the distance.
///
/// Gaussian–Gaussian with `q = 2` uses the closed form
/// `(m_a - m_b)^2 + (s_a - s_b)^2`; empirical–empirical is integrated
/// exactly on the merged quantile grid.
pub fn wasserstein_pow_with_grid<F: Real>(
    a: &Distribution1D<F>,
    b: &Distribution1D<F>,
    q: F,
    grid: usize,
) -> Result<F> {
    validate_order(q)?;
    if q == F::of(2.0) {
        if let (Some((ma, sa)), Some((mb, sb))) = (a.gaussian_params(), b.gaussian_params()) {
            let dm = ma - mb;
            let ds = sa - sb;
            return Ok(dm * dm + ds * ds);
        }
    }
    let ea = a.discretized(grid)?;
    let eb = b.discretized(grid)?;
    Ok(atoms_wq_pow(&ea, &eb, q))
}

/// Exact `W_q^q` between two atomic distributions via the merged grid of
/// cumulative masses.
fn atoms_wq_pow<F: Real>(a: &Atoms<F>, b: &Atoms<F>, q: F) -> F {
    let mut acc = F::zero();
    let mut t_prev = F::zero();
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.values.len() && j < b.values.len() {
        let t_next = a.cumulative[i].min(b.cumulative[j]);
        if t_next > t_prev {
            acc += (t_next - t_prev) * abs_pow(a.values[i] - b.values[j], q);
        }
        if a.cumulative[i] == t_next {
            i += 1;
        }
        if b.cumulative[j] == t_next {
            j += 1;
        }
        t_prev = t_next;
    }
    acc
}

/// q-barycenter of `dists` under `weights`, represented on `grid` quantile
/// midpoints (exactly Gaussian when every input is Gaussian and `q = 2`).
pub fn barycenter<F: Real>(
    dists: &[Distribution1D<F>],
    weights: &WeightVector<F>,
    q: F,
    grid: usize,
) -> Result<Distribution1D<F>> {
    if dists.is_empty() {
        return Err(Error::empty("barycenter of no distributions"));
    }
    if dists.len() != weights.len() {
        return Err(Error::weights("one weight per distribution required"));
    }
    validate_order(q)?;
    if grid < 2 {
        return Err(Error::domain("barycenter grid must have >= 2 points"));
    }
    if q == F::of(2.0) && dists.iter().all(Distribution1D::is_gaussian) {
        let mut mean = F::zero();
        let mut stddev = F::zero();
        for (d, &w) in dists.iter().zip(weights.as_slice()) {
            let (m, s) = d.gaussian_params().expect("gaussian");
            mean += w * m;
            stddev += w * s;
        }
        return Distribution1D::gaussian(mean, stddev);
    }

    let g = F::of_usize(grid);
    let mut quantiles = vec![F::zero(); dists.len()];
    let mut values = Vec::with_capacity(grid);
    for j in 0..grid {
        let t = (F::of_usize(j) + F::of(0.5)) / g;
        for (s, d) in dists.iter().enumerate() {
            quantiles[s] = d.quantile(t)?;
        }
        values.push(pointwise_barycenter(&quantiles, weights.as_slice(), q));
    }
    Distribution1D::empirical_uniform(&values)
}

/// Exact `∫_0^1 min_y Σ_s w_s |F_s^{-1}(t) - y|^q dt`, the attained
/// barycenter objective. Atomic inputs are integrated segment-by-segment on
/// the union of their cumulative-mass breakpoints (no grid error);
/// Gaussians are discretized on `grid` midpoints first unless the whole
/// family is Gaussian with `q = 2`, which has a closed form.
pub(crate) fn barycenter_objective<F: Real>(
    dists: &[Distribution1D<F>],
    weights: &WeightVector<F>,
    q: F,
    grid: usize,
) -> Result<F> {
    if dists.is_empty() {
        return Err(Error::empty("barycenter objective of no distributions"));
    }
    if dists.len() != weights.len() {
        return Err(Error::weights("one weight per distribution required"));
    }
    validate_order(q)?;
    if q == F::of(2.0) && dists.iter().all(Distribution1D::is_gaussian) {
        let mut mean_bar = F::zero();
        let mut std_bar = F::zero();
        for (d, &w) in dists.iter().zip(weights.as_slice()) {
            let (m, s) = d.gaussian_params().expect("gaussian");
            mean_bar += w * m;
            std_bar += w * s;
        }
        let mut acc = F::zero();
        for (d, &w) in dists.iter().zip(weights.as_slice()) {
            let (m, s) = d.gaussian_params().expect("gaussian");
            let dm = m - mean_bar;
            let ds = s - std_bar;
            acc += w * (dm * dm + ds * ds);
        }
        return Ok(acc);
    }

    let atoms: Vec<Cow<'_, Atoms<F>>> = dists
        .iter()
        .map(|d| d.discretized(grid))
        .collect::<Result<_>>()?;
    let k = atoms.len();
    let w = weights.as_slice();
    let mut idx = vec![0usize; k];
    let mut points = vec![F::zero(); k];
    let mut acc = F::zero();
    let mut t_prev = F::zero();
    loop {
        let mut t_next = F::one();
        for s in 0..k {
            points[s] = atoms[s].values[idx[s]];
            t_next = t_next.min(atoms[s].cumulative[idx[s]]);
        }
        if t_next > t_prev {
            let y = pointwise_barycenter(&points, w, q);
            let obj: F = points
                .iter()
                .zip(w)
                .map(|(&p, &ws)| ws * abs_pow(p - y, q))
                .sum();
            acc += (t_next - t_prev) * obj;
        }
        let mut exhausted = false;
        for s in 0..k {
            if atoms[s].cumulative[idx[s]] == t_next {
                if idx[s] + 1 == atoms[s].values.len() {
                    exhausted = true;
                } else {
                    idx[s] += 1;
                }
            }
        }
        t_prev = t_next;
        if exhausted || t_prev >= F::one() {
            break;
        }
    }
    Ok(acc)
}

/// Optimal transport map from group `s` to the q-barycenter, evaluated at
/// `x`: the group CDF is composed with the barycenter quantile rule.
pub fn transport_map_to_barycenter<F: Real>(
    dists: &[Distribution1D<F>],
    weights: &WeightVector<F>,
    group: usize,
    q: F,
    x: F,
) -> Result<F> {
    if dists.is_empty() {
        return Err(Error::empty("transport with no distributions"));
    }
    if dists.len() != weights.len() {
        return Err(Error::weights("one weight per distribution required"));
    }
    if group >= dists.len() {
        return Err(Error::domain(format!(
            "group index {group} out of range (K = {})",
            dists.len()
        )));
    }
    validate_order(q)?;
    // Nudge the level inside (0, 1) so mixed-variant inversions stay finite
    // when the CDF rounds to an endpoint.
    let u = dists[group]
        .cdf(x)
        .max(F::min_positive_value())
        .min(F::one() - F::epsilon());
    let mut targets = vec![F::zero(); dists.len()];
    for (s, d) in dists.iter().enumerate() {
        targets[s] = d.quantile(u)?;
    }
    Ok(pointwise_barycenter(&targets, weights.as_slice(), q))
}

/// Kolmogorov–Smirnov distance `sup_t |F_a(t) - F_b(t)|`.
///
/// Exact on the union of jump points for empirical inputs; Gaussian pairs
/// are scanned on a dense grid with local refinement.
pub fn ks_distance<F: Real>(a: &Distribution1D<F>, b: &Distribution1D<F>) -> F {
    let a = normalize_degenerate(a);
    let b = normalize_degenerate(b);
    match (&a.repr, &b.repr) {
        (Repr::Atoms(xa), Repr::Atoms(xb)) => ks_atoms(xa, xb),
        (Repr::Atoms(xa), Repr::Gaussian { .. }) => ks_atoms_vs_continuous(xa, &b),
        (Repr::Gaussian { .. }, Repr::Atoms(xb)) => ks_atoms_vs_continuous(xb, &a),
        (Repr::Gaussian { .. }, Repr::Gaussian { .. }) => {
            let (lo_a, hi_a) = a.span();
            let (lo_b, hi_b) = b.span();
            ks_scan(
                |t| (a.cdf(t) - b.cdf(t)).abs(),
                lo_a.min(lo_b),
                hi_a.max(hi_b),
            )
        }
    }
}

fn normalize_degenerate<F: Real>(d: &Distribution1D<F>) -> Cow<'_, Distribution1D<F>> {
    match d.repr {
        Repr::Gaussian { mean, stddev } if stddev == F::zero() => {
            Cow::Owned(Distribution1D::point_mass(mean))
        }
        _ => Cow::Borrowed(d),
    }
}

fn ks_atoms<F: Real>(a: &Atoms<F>, b: &Atoms<F>) -> F {
    // Both CDFs are right-continuous steps, so the supremum is attained at
    // a jump of either.
    let mut best = F::zero();
    let (mut i, mut j) = (0usize, 0usize);
    let (mut ca, mut cb) = (F::zero(), F::zero());
    while i < a.values.len() || j < b.values.len() {
        let next_a = a.values.get(i).copied().unwrap_or_else(F::infinity);
        let next_b = b.values.get(j).copied().unwrap_or_else(F::infinity);
        let x = next_a.min(next_b);
        if next_a == x {
            ca = a.cumulative[i];
            i += 1;
        }
        if next_b == x {
            cb = b.cumulative[j];
            j += 1;
        }
        best = best.max((ca - cb).abs());
    }
    best
}

fn ks_atoms_vs_continuous<F: Real>(a: &Atoms<F>, continuous: &Distribution1D<F>) -> F {
    // Between atoms the step CDF is flat while the continuous CDF is
    // monotone, so extremes sit at atom positions (from both sides).
    let mut best = F::zero();
    let mut prev_cum = F::zero();
    for (idx, &x) in a.values.iter().enumerate() {
        let g = continuous.cdf(x);
        best = best.max((g - a.cumulative[idx]).abs());
        best = best.max((g - prev_cum).abs());
        prev_cum = a.cumulative[idx];
    }
    best
}

/// Dense scan plus golden refinement of `t -> f(t)` maxima on `[lo, hi]`.
pub(crate) fn ks_scan<F: Real>(f: impl Fn(F) -> F, lo: F, hi: F) -> F {
    const COARSE: usize = 8_001;
    if !(hi > lo) {
        return f(lo);
    }
    let step = (hi - lo) / F::of_usize(COARSE - 1);
    let mut values = Vec::with_capacity(COARSE);
    for k in 0..COARSE {
        values.push(f(lo + step * F::of_usize(k)));
    }
    let mut order: Vec<usize> = (0..COARSE).collect();
    order.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).expect("finite"));
    let mut best = values[order[0]];
    for &k in order.iter().take(3) {
        let center = lo + step * F::of_usize(k);
        let a = (center - step).max(lo);
        let b = (center + step).min(hi);
        let x = golden_min(a, b, |t| -f(t));
        best = best.max(f(x));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emp(values: &[f64]) -> Distribution1D<f64> {
        Distribution1D::empirical_uniform(values).unwrap()
    }

    #[test]
    fn cdf_counts_mass_at_or_below() {
        let d = emp(&[1.0, 2.0, 3.0]);
        assert!((d.cdf(2.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.cdf(0.5), 0.0);
        assert_eq!(d.cdf(3.0), 1.0);
        let g = Distribution1D::gaussian(0.0f64, 1.0).unwrap();
        assert!((g.cdf(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quantile_is_generalized_inverse() {
        let d = emp(&[1.0, 2.0, 3.0]);
        // enumeration: F(1) = 1/3 < 0.5, F(2) = 2/3 >= 0.5
        assert_eq!(d.quantile(0.5).unwrap(), 2.0);
        assert_eq!(d.quantile(1.0).unwrap(), 3.0);
        let g = Distribution1D::gaussian(3.0f64, 2.0).unwrap();
        assert!((g.quantile(0.5).unwrap() - 3.0).abs() < 1e-12);
        let point = Distribution1D::point_mass(5.0);
        for t in [0.05, 0.4, 1.0] {
            assert_eq!(point.quantile(t).unwrap(), 5.0);
        }
        assert!(d.quantile(0.0).is_err());
        assert!(d.quantile(1.0 + 1e-9).is_err());
    }

    #[test]
    fn quantile_cdf_round_trip_on_support() {
        let d = emp(&[-2.0, 0.5, 0.5, 3.0, 9.0]);
        let (values, _) = d.atoms().unwrap();
        for &x in values {
            assert_eq!(d.quantile(d.cdf(x)).unwrap(), x);
        }
    }

    #[test]
    fn gaussian_w2_closed_form() {
        let a = Distribution1D::gaussian(0.0, 1.0).unwrap();
        let b = Distribution1D::gaussian(1.0, 2.0).unwrap();
        let d = wasserstein(&a, &b, 2.0).unwrap();
        assert!((d - 2.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(wasserstein(&a, &a, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn empirical_w2_matches_two_point_coupling() {
        // brute force over the two couplings of a 2x2 assignment: identity
        // pairing costs (1^2 + 1^2)/2 = 1, crossing costs (9 + 1)/2 = 5.
        let a = emp(&[0.0, 2.0]);
        let b = emp(&[1.0, 3.0]);
        assert!((wasserstein(&a, &b, 2.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn wasserstein_rejects_small_q() {
        let a = emp(&[0.0]);
        assert!(wasserstein(&a, &a, 0.5).is_err());
    }

    #[test]
    fn gaussian_w2_closed_form_matches_grid_integration() {
        let a = Distribution1D::gaussian(-0.3f64, 0.8).unwrap();
        let b = Distribution1D::gaussian(1.1, 1.7).unwrap();
        let exact = wasserstein(&a, &b, 2.0).unwrap();
        let ga = a.discretized(10_000).unwrap().into_owned();
        let gb = b.discretized(10_000).unwrap().into_owned();
        let grid = atoms_wq_pow(&ga, &gb, 2.0).sqrt();
        assert!((exact - grid).abs() < 1e-4, "exact {exact} grid {grid}");
    }

    #[test]
    fn gaussian_barycenter_closed_form() {
        let dists = vec![
            Distribution1D::gaussian(0.0, 1.0).unwrap(),
            Distribution1D::gaussian(2.0, 3.0).unwrap(),
        ];
        let w = WeightVector::uniform(2);
        let bary = barycenter(&dists, &w, 2.0, 100).unwrap();
        assert_eq!(bary.gaussian_params(), Some((1.0, 2.0)));
    }

    #[test]
    fn point_mass_barycenter_is_midpoint() {
        // fine-grid oracle: 0.5 y^2 + 0.5 (2 - y)^2 is minimized at y = 1.
        let mut best = (f64::INFINITY, f64::NAN);
        for k in 0..=4000 {
            let y = -1.0 + 4.0 * k as f64 / 4000.0;
            let obj = 0.5 * y * y + 0.5 * (2.0 - y) * (2.0 - y);
            if obj < best.0 {
                best = (obj, y);
            }
        }
        assert!((best.1 - 1.0).abs() < 1e-3);

        let dists = vec![
            Distribution1D::point_mass(0.0),
            Distribution1D::point_mass(2.0),
        ];
        let w = WeightVector::uniform(2);
        let bary = barycenter(&dists, &w, 2.0, 64).unwrap();
        let (values, masses) = bary.atoms().unwrap();
        assert_eq!(values, &[1.0]);
        assert_eq!(masses, &[1.0]);
    }

    #[test]
    fn single_distribution_barycenter_is_identity() {
        let d = emp(&[1.0, 4.0, 4.0, 6.0]);
        let w = WeightVector::uniform(1);
        let bary = barycenter(std::slice::from_ref(&d), &w, 2.0, 1000).unwrap();
        assert!((wasserstein(&d, &bary, 2.0).unwrap()).abs() < 1e-2);
        let g = Distribution1D::gaussian(0.7, 1.3).unwrap();
        let bary = barycenter(std::slice::from_ref(&g), &w, 2.0, 10).unwrap();
        assert_eq!(bary.gaussian_params(), Some((0.7, 1.3)));
    }

    #[test]
    fn barycenter_rejects_empty_input() {
        let w = WeightVector::<f64>::uniform(1);
        assert!(barycenter(&[], &w, 2.0, 10).is_err());
    }

    #[test]
    fn transport_map_examples() {
        let w = WeightVector::uniform(2);
        // shifted pair: F_2^{-1}(F_1(0)) = 2, average of {0, 2} is 1.
        let dists = vec![
            Distribution1D::gaussian(0.0f64, 1.0).unwrap(),
            Distribution1D::gaussian(2.0, 1.0).unwrap(),
        ];
        let y = transport_map_to_barycenter(&dists, &w, 0, 2.0, 0.0).unwrap();
        assert!((y - 1.0).abs() < 1e-12);
        // scale pair: F_2^{-1}(F_1(1)) = 2, average of {1, 2} is 1.5.
        let dists = vec![
            Distribution1D::gaussian(0.0, 1.0).unwrap(),
            Distribution1D::gaussian(0.0, 2.0).unwrap(),
        ];
        let y = transport_map_to_barycenter(&dists, &w, 0, 2.0, 1.0).unwrap();
        assert!((y - 1.5).abs() < 1e-8);
        // identical groups: identity on the support.
        let e = emp(&[0.0, 1.0, 5.0]);
        let dists = vec![e.clone(), e];
        for x in [0.0, 1.0, 5.0] {
            let y = transport_map_to_barycenter(&dists, &w, 1, 2.0, x).unwrap();
            assert_eq!(y, x);
        }
        assert!(transport_map_to_barycenter(&dists, &w, 2, 2.0, 0.0).is_err());
    }

    #[test]
    fn ks_distance_examples() {
        let a = emp(&[0.0, 1.0]);
        assert_eq!(ks_distance(&a, &a), 0.0);
        let d0 = Distribution1D::point_mass(0.0);
        let d1 = Distribution1D::point_mass(1.0);
        assert_eq!(ks_distance(&d0, &d1), 1.0);
        // jump enumeration: CDFs agree at 0 (1/2 each), differ by 1/2 at 1.
        let b = emp(&[0.0, 2.0]);
        assert!((ks_distance(&a, &b) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ks_distance_mixed_variants() {
        // step vs continuous: extremes at atom positions from both sides
        let atoms = emp(&[-1.0, 1.0]);
        let g = Distribution1D::gaussian(0.0f64, 1.0).unwrap();
        let expected = 0.5 - std_normal_cdf(-1.0f64); // 0.34134...
        assert!((ks_distance(&atoms, &g) - expected).abs() < 1e-12);
        assert!((ks_distance(&g, &atoms) - expected).abs() < 1e-12);
        let point = Distribution1D::point_mass(0.0);
        assert!((ks_distance(&point, &g) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn wasserstein_mixed_variants_via_discretization() {
        // W_2(point mass at 0, standard normal) = sqrt(E Z^2) = 1, up to
        // the quantile-grid tail truncation
        let point = Distribution1D::point_mass(0.0);
        let g = Distribution1D::gaussian(0.0f64, 1.0).unwrap();
        let d = wasserstein(&point, &g, 2.0).unwrap();
        assert!((d - 1.0).abs() < 5e-3, "W2 {d}");
    }

    #[test]
    fn ks_distance_gaussian_pair_matches_reference() {
        // Equal variances, means apart: the maximum CDF gap sits at the
        // midpoint, 2 * Phi(delta / 2) - 1.
        let a = Distribution1D::gaussian(0.0f64, 1.0).unwrap();
        let b = Distribution1D::gaussian(1.0, 1.0).unwrap();
        let expected = 2.0 * std_normal_cdf(0.5f64) - 1.0;
        assert!((ks_distance(&a, &b) - expected).abs() < 1e-9);
        assert!(ks_distance(&a, &a) < 1e-15);
    }

    #[test]
    fn weighted_median_is_lower() {
        // even split: ties resolved to the smaller point.
        let y = pointwise_barycenter(&[0.0f64, 2.0], &[0.5, 0.5], 1.0);
        assert_eq!(y, 0.0);
        let y = pointwise_barycenter(&[0.0f64, 2.0, 5.0], &[0.2, 0.5, 0.3], 1.0);
        assert_eq!(y, 2.0);
    }

    #[test]
    fn golden_section_matches_closed_forms() {
        // q = 3 objective still convex; compare against a fine scan.
        let points = [0.0f64, 1.0, 4.0];
        let weights = [0.2f64, 0.5, 0.3];
        let q = 3.0;
        let y = pointwise_barycenter(&points, &weights, q);
        let mut best = (f64::INFINITY, f64::NAN);
        for k in 0..=400_000 {
            let cand = 4.0 * k as f64 / 400_000.0;
            let obj: f64 = points
                .iter()
                .zip(&weights)
                .map(|(&p, &w)| w * (p - cand).abs().powf(q))
                .sum();
            if obj < best.0 {
                best = (obj, cand);
            }
        }
        assert!((y - best.1).abs() < 1e-4, "golden {y} scan {}", best.1);
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![0.5, 0.5]).is_ok());
        assert!(WeightVector::new(vec![0.6, 0.5]).is_err());
        assert!(WeightVector::new(vec![-0.5, 1.5]).is_err());
        assert!(WeightVector::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn quantile_with_uneven_masses() {
        let d = Distribution1D::empirical(vec![1.0, 2.0, 3.0], vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(d.quantile(0.2).unwrap(), 1.0);
        assert_eq!(d.quantile(0.21).unwrap(), 2.0);
        assert_eq!(d.quantile(0.5).unwrap(), 2.0);
        assert_eq!(d.quantile(0.51).unwrap(), 3.0);
        assert_eq!(d.quantile(1.0).unwrap(), 3.0);
    }

    #[test]
    fn uneven_mass_wasserstein_matches_riemann_quadrature() {
        let a = Distribution1D::empirical(vec![-1.0, 0.5, 4.0], vec![0.2, 0.3, 0.5]).unwrap();
        let b = Distribution1D::empirical(vec![0.0, 2.0], vec![0.7, 0.3]).unwrap();
        for q in [1.0, 2.0, 2.7] {
            let exact = wasserstein_pow_with_grid(&a, &b, q, DEFAULT_GRID).unwrap();
            // independent route: fine midpoint quadrature of the quantile gap
            let m = 400_000;
            let mut acc = 0.0;
            for j in 0..m {
                let t = (j as f64 + 0.5) / m as f64;
                let gap = (a.quantile(t).unwrap() - b.quantile(t).unwrap()).abs();
                acc += gap.powf(q);
            }
            acc /= m as f64;
            assert!((exact - acc).abs() < 1e-3, "q {q}: {exact} vs {acc}");
        }
    }

    #[test]
    fn empirical_merges_ties() {
        let d = Distribution1D::empirical(vec![1.0, 1.0, 2.0], vec![0.25, 0.25, 0.5]).unwrap();
        let (values, masses) = d.atoms().unwrap();
        assert_eq!(values, &[1.0, 2.0]);
        assert_eq!(masses, &[0.5, 0.5]);
    }

    #[test]
    fn works_in_single_precision() {
        let a = Distribution1D::<f32>::gaussian(0.0, 1.0).unwrap();
        let b = Distribution1D::<f32>::gaussian(1.0, 2.0).unwrap();
        let d = wasserstein(&a, &b, 2.0f32).unwrap();
        assert!((d - 2.0f32.sqrt()).abs() < 1e-6);
    }
}
