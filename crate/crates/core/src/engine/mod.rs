//! Singular Legendre transform, Hamilton–Jacobi generators, total
//! differential equations and the integrability iteration.

mod chain;
mod hamiltonian;
mod legendre;
#[cfg(test)]
mod tests;

use thiserror::Error;

use crate::symcore::SymError;

pub use chain::{
    classify, integrability_step, involution_residuals, run_chain, Closure, Constraint, ConstraintChain,
    ConstraintClass, DependencyCertificate, IntegrabilityStep, ParameterRelation, Provenance, DEFAULT_MAX_GENERATIONS,
};
pub use hamiltonian::{
    build_h0, build_hjpde, derive_flow, generator_brackets, FlowRow, Generator, HamiltonianSet, TotalDifferentialSystem,
};
pub use legendre::{legendre, LegendreResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("unsupported Lagrangian: {0}")]
    Unsupported(String),
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Symbolic(#[from] SymError),
}

impl EngineError {
    pub fn is_unsupported(&self) -> bool {
        matches!(
            self,
            EngineError::Unsupported(_)
                | EngineError::Symbolic(SymError::NotAffine(_) | SymError::NonPolynomialSolution { .. })
        )
    }
}
