//! Numerical witnesses: RK4 integration of the total differential
//! equations, constraint and energy drift, an on-surface integrability
//! probe, and an independent Dirac–Bergmann oracle.

mod drift;
mod numeric;
mod oracle;
mod probe;
#[cfg(test)]
mod tests;

pub use drift::{constraint_drift, drift_with_halving, ConstraintMaximum, DriftReport, HalvingEstimate};
pub use numeric::{
    integrate_flow, to_float, CompiledExpr, CompiledPaths, Layout, NumericState, NumericSystem, ParameterPath,
    Trajectory,
};
pub use oracle::{compare_chains, dirac_oracle, ChainComparison, Verdict};
pub use probe::{
    gauss_surface_state, integrability_probe, on_surface_state, random_surface_point, ProbeReport, SurfaceProjector,
    PROBE_TOLERANCE, REJECTION_TOLERANCE,
};

pub const DRIFT_TOLERANCE: f64 = 1e-8;
