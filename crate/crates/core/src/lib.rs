//! Layered Hill estimators for the tail exponent of spherically symmetric,
//! regularly varying densities.
//!
//! The k-th layered estimator replaces the top order statistics of the sample
//! norms by the top order statistics of `min |y|` over k-point subsets that
//! satisfy a geometric constraint (for k = 2, pairs within a fixed distance).
//! Those subsets live closer to the origin than the plain extremes, so the
//! estimator keeps working when the most extreme observations are missing.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` / `*32` aliases below fix the scalar for callers that don't care.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constraints;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod order_stats;
pub mod samplers;
pub mod scalar;

pub use constraints::{Constraint, ConstraintKind};
pub use error::{Error, Result};
pub use estimator::{
    alpha_hat, confidence_interval, estimate, geometric_constants, inverse_normal_cdf,
    layered_hill, limit_coeff_lkl, normalized_statistic, select_regime, theoretical_radius_rk,
    variance_constant_a, ConfidenceInterval, ConstantsMethod, EstimateOptions, EstimateReport,
    GeometricConstants, Regime, DEFAULT_REGIME_TOL,
};
pub use geometry::{build_index, GridIndex, PointCloud};
pub use order_stats::{brute_force_tuple_values, top_tuple_values, OrderStatStream};
pub use samplers::{
    missing_count, remove_top_extremes, sample_cloud, RadialFamily, RadialModel, SeededRng,
};
pub use scalar::Scalar;

pub type PointCloud64 = PointCloud<f64>;
pub type PointCloud32 = PointCloud<f32>;
pub type GridIndex64<'a> = GridIndex<'a, f64>;
pub type Constraint64 = Constraint<f64>;
pub type Constraint32 = Constraint<f32>;
pub type OrderStatStream64 = OrderStatStream<f64>;
pub type OrderStatStream32 = OrderStatStream<f32>;
pub type GeometricConstants64 = GeometricConstants<f64>;
pub type EstimateReport64 = EstimateReport<f64>;
pub type EstimateReport32 = EstimateReport<f32>;
pub type RadialModel64 = RadialModel<f64>;
pub type Regime64 = Regime<f64>;
