//! Property tests: metric axioms of the transport distance, agreement with
//! a brute-force assignment oracle, quantile/CDF duality, and the algebraic
//! laws of the unfairness functional.

use fairreg_core::dist1d::{
    barycenter, ks_distance, wasserstein, wasserstein_pow_with_grid, Distribution1D,
    WeightVector, DEFAULT_GRID,
};
use fairreg_core::fairness::{unfairness, GroupedPredictions};
use fairreg_core::rng;
use proptest::prelude::*;

fn emp(values: &[f64]) -> Distribution1D<f64> {
    Distribution1D::empirical_uniform(values).unwrap()
}

/// Brute-force minimum-cost assignment between equal-size uniform-mass
/// samples: enumerates all n! pairings. Independent of the quantile path.
fn assignment_oracle(xs: &[f64], ys: &[f64], q: f64) -> f64 {
    fn walk(
        xs: &[f64],
        ys: &[f64],
        q: f64,
        used: &mut Vec<bool>,
        i: usize,
        cost: f64,
        best: &mut f64,
    ) {
        if i == xs.len() {
            *best = best.min(cost);
            return;
        }
        for j in 0..ys.len() {
            if !used[j] {
                used[j] = true;
                walk(
                    xs,
                    ys,
                    q,
                    used,
                    i + 1,
                    cost + (xs[i] - ys[j]).abs().powf(q),
                    best,
                );
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    let mut used = vec![false; ys.len()];
    walk(xs, ys, q, &mut used, 0, 0.0, &mut best);
    best / xs.len() as f64
}

fn samples() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0f64..50.0, 1..10)
}

proptest! {
    #[test]
    fn wasserstein_is_symmetric(a in samples(), b in samples(), qi in 0usize..3) {
        let q = [1.0, 2.0, 3.5][qi];
        let (da, db) = (emp(&a), emp(&b));
        let ab = wasserstein(&da, &db, q).unwrap();
        let ba = wasserstein(&db, &da, q).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert!(ab >= 0.0);
    }

    #[test]
    fn wasserstein_identity(a in samples(), qi in 0usize..3) {
        let q = [1.0, 2.0, 3.5][qi];
        let d = emp(&a);
        prop_assert_eq!(wasserstein(&d, &d, q).unwrap(), 0.0);
    }

    #[test]
    fn wasserstein_triangle(a in samples(), b in samples(), c in samples(), qi in 0usize..3) {
        let q = [1.0, 2.0, 3.5][qi];
        let (da, db, dc) = (emp(&a), emp(&b), emp(&c));
        let ac = wasserstein(&da, &dc, q).unwrap();
        let ab = wasserstein(&da, &db, q).unwrap();
        let bc = wasserstein(&db, &dc, q).unwrap();
        prop_assert!(ac <= ab + bc + 1e-9, "{} > {} + {}", ac, ab, bc);
    }

    #[test]
    fn quantile_cdf_round_trip(a in samples()) {
        let d = emp(&a);
        let (values, _) = d.atoms().unwrap();
        for &x in values {
            prop_assert_eq!(d.quantile(d.cdf(x)).unwrap(), x);
        }
    }

    #[test]
    fn matches_assignment_oracle(
        n in 1usize..=6,
        seed in 0u64..1000,
        qi in 0usize..3,
    ) {
        let q = [1.0, 2.0, 3.0][qi];
        let mut r = rng::derive_rng(seed, 40);
        let xs: Vec<f64> = (0..n).map(|_| rng::standard_normal::<f64, _>(&mut r) * 3.0).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng::standard_normal::<f64, _>(&mut r) * 3.0).collect();
        let pow = wasserstein_pow_with_grid(&emp(&xs), &emp(&ys), q, DEFAULT_GRID).unwrap();
        let oracle = assignment_oracle(&xs, &ys, q);
        prop_assert!((pow - oracle).abs() <= 1e-9, "pow {} oracle {}", pow, oracle);
    }

    #[test]
    fn unfairness_scaling_law(
        a in samples(), b in samples(), scale in 0.1f64..10.0,
    ) {
        let w = WeightVector::uniform(2);
        let base = GroupedPredictions::new(vec![a.clone(), b.clone()]).unwrap();
        let scaled = GroupedPredictions::new(vec![
            a.iter().map(|v| v * scale).collect(),
            b.iter().map(|v| v * scale).collect(),
        ])
        .unwrap();
        let u = unfairness(&base, &w, 2.0, DEFAULT_GRID).unwrap();
        let us = unfairness(&scaled, &w, 2.0, DEFAULT_GRID).unwrap();
        prop_assert!((us - scale * scale * u).abs() <= 1e-9 * (1.0 + u), "{} vs {}", us, scale * scale * u);
    }

    #[test]
    fn unfairness_translation_invariance(
        a in samples(), b in samples(), shift in -25.0f64..25.0,
    ) {
        let w = WeightVector::uniform(2);
        let base = GroupedPredictions::new(vec![a.clone(), b.clone()]).unwrap();
        let shifted = GroupedPredictions::new(vec![
            a.iter().map(|v| v + shift).collect(),
            b.iter().map(|v| v + shift).collect(),
        ])
        .unwrap();
        let u = unfairness(&base, &w, 2.0, DEFAULT_GRID).unwrap();
        let ut = unfairness(&shifted, &w, 2.0, DEFAULT_GRID).unwrap();
        prop_assert!((ut - u).abs() <= 1e-9 * (1.0 + u));
    }

    #[test]
    fn unfairness_zero_iff_identical(a in samples(), b in samples()) {
        let w = WeightVector::uniform(2);
        let same = GroupedPredictions::new(vec![a.clone(), a.clone()]).unwrap();
        prop_assert_eq!(unfairness(&same, &w, 2.0, DEFAULT_GRID).unwrap(), 0.0);
        let da = emp(&a);
        let db = emp(&b);
        if da != db {
            let mixed = GroupedPredictions::new(vec![a.clone(), b.clone()]).unwrap();
            prop_assert!(unfairness(&mixed, &w, 2.0, DEFAULT_GRID).unwrap() > 0.0);
        }
    }

    #[test]
    fn ks_distance_bounded_and_symmetric(a in samples(), b in samples()) {
        let (da, db) = (emp(&a), emp(&b));
        let d = ks_distance(&da, &db);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(d, ks_distance(&db, &da));
    }
}

#[test]
fn barycenter_beats_geodesic_candidates() {
    // Smooth atomic inputs (fine discretizations of Gaussians) keep every
    // distance exact; the candidates interpolate the two quantile
    // functions and the best of them is the one at the barycenter weight.
    let cases: [(f64, f64, f64, f64, f64); 3] = [
        (0.0, 1.0, 2.0, 1.0, 0.5),
        (-1.0, 0.5, 3.0, 2.0, 0.3),
        (0.0, 2.0, 0.5, 0.3, 0.8),
    ];
    let support = 500usize;
    for (m0, s0, m1, s1, w1) in cases {
        let discretize = |m: f64, s: f64| {
            let g0 = Distribution1D::gaussian(m, s).unwrap();
            let values: Vec<f64> = (0..support)
                .map(|j| g0.quantile((j as f64 + 0.5) / support as f64).unwrap())
                .collect();
            Distribution1D::empirical_uniform(&values).unwrap()
        };
        let d0 = discretize(m0, s0);
        let d1 = discretize(m1, s1);
        let w = WeightVector::new(vec![1.0 - w1, w1]).unwrap();
        let dists = [d0.clone(), d1.clone()];
        let bary = barycenter(&dists, &w, 2.0, 4 * support).unwrap();
        let objective = |cand: &Distribution1D<f64>| -> f64 {
            (1.0 - w1) * wasserstein_pow_with_grid(&d0, cand, 2.0, DEFAULT_GRID).unwrap()
                + w1 * wasserstein_pow_with_grid(&d1, cand, 2.0, DEFAULT_GRID).unwrap()
        };
        let ours = objective(&bary);
        for k in 0..=20 {
            let theta = k as f64 / 20.0;
            let values: Vec<f64> = (0..support)
                .map(|j| {
                    let t = (j as f64 + 0.5) / support as f64;
                    (1.0 - theta) * d0.quantile(t).unwrap() + theta * d1.quantile(t).unwrap()
                })
                .collect();
            let cand = Distribution1D::empirical_uniform(&values).unwrap();
            let cand_obj = objective(&cand);
            assert!(
                ours <= cand_obj + 1e-6,
                "candidate theta={theta} beat the barycenter: {cand_obj} < {ours}"
            );
        }
    }
}
