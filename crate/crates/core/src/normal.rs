//! Standard normal CDF and quantile function, generic over the scalar type.
//!
//! The special functions are evaluated in double precision through
//! `statrs` and converted back, which keeps tail accuracy uniform across
//! scalar instantiations.

use statrs::function::erf;

use crate::scalar::Real;

/// Standard normal CDF.
pub fn std_normal_cdf<F: Real>(z: F) -> F {
    let z = z.as_f64();
    F::of(0.5 * erf::erfc(-z / std::f64::consts::SQRT_2))
}

/// Standard normal quantile function for `p` in `(0, 1)`.
pub fn std_normal_quantile<F: Real>(p: F) -> F {
    let p = p.as_f64();
    debug_assert!(p > 0.0 && p < 1.0);
    F::of(-std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * p))
}
