//! Risk–fairness trade-off toolkit for regression under demographic-parity
//! style constraints.
//!
//! The building blocks are one-dimensional optimal transport primitives
//! (quantile-based Wasserstein distances and barycenters, [`dist1d`]), the
//! unfairness functional and its finite-sample estimators ([`fairness`]),
//! closed-form trade-off curves for the family of partially fair optimal
//! predictors ([`oracle`]), a bias-adjusted least-squares estimator with a
//! data-driven fairness calibration for the linear model with systematic
//! group bias ([`linear`]), and a model-free randomized post-processing
//! operator with exact demographic parity ([`postprocess`]).
//!
//! All numeric code is generic over the scalar type via [`Real`]
//! (instantiated as `f32` or `f64`); `*64` aliases at the crate root cover
//! the common double-precision case.

// Validation uses negated comparisons (`!(x >= lo && x <= hi)`) so NaN
// arguments fail the check instead of slipping through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dist1d;
pub mod error;
pub mod fairness;
pub mod linalg;
pub mod linear;
pub mod normal;
pub mod oracle;
pub mod postprocess;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision aliases for the main domain types.
pub type Dist64 = dist1d::Distribution1D<f64>;
pub type Weights64 = dist1d::WeightVector<f64>;
pub type OracleModel64 = oracle::OracleModel<f64>;
pub type TradeoffPoint64 = oracle::TradeoffPoint<f64>;
pub type LinearBiasModel64 = linear::LinearBiasModel<f64>;
pub type LinearFit64 = linear::LinearFit<f64>;
pub type Calibration64 = postprocess::Calibration<f64>;
