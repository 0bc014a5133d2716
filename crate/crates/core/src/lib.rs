//! Canonical (Hamilton–Jacobi) analysis of singular Lagrangian systems.
//!
//! The symbolic layer is generic over its coefficient ring and the numeric
//! layer over its float type; the aliases below fix the concrete choices
//! used throughout the pipeline.

pub mod action;
pub mod engine;
pub mod frontend;
pub mod pipeline;
pub mod symcore;
pub mod verify;

/// Exact rational coefficient.
pub type Rational = num_rational::BigRational;

/// Canonical polynomial expression over exact rationals.
pub type Expr = symcore::Poly<Rational>;

/// Expression with float coefficients, used when compiling for numerics.
pub type FloatExpr = symcore::Poly<f64>;

/// Phase-space point in double precision.
pub type NumericState = verify::NumericState<f64>;

/// RK4 trajectory in double precision.
pub type Trajectory = verify::Trajectory<f64>;
