//! Exact symbolic substrate: symbols, canonical polynomials, Poisson
//! brackets, affine elimination and division modulo constraint sets.

mod bracket;
mod linsolve;
mod poly;
pub mod reduce;
mod symbol;
mod term;

use std::fmt;

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use thiserror::Error;

pub use bracket::{poisson_bracket, PhaseSpaceSignature};
pub use linsolve::{solve_linear_symbolic, GenericRankWarning, LinearSolution};
pub use poly::{Coeff, FieldCoeff, Monomial, Poly};
pub use reduce::{divide, Division, Reduction, SurfaceReducer};
pub use symbol::{momentum_name, Symbol, SymbolKind};
pub use term::{normalize, Term};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymError {
    #[error("unsupported expression: {0}")]
    Unsupported(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("equation is not affine in the unknowns: {0}")]
    NotAffine(String),
    #[error("solution for {unknown} is not polynomial (pivot `{pivot}`)")]
    NonPolynomialSolution { unknown: String, pivot: String },
    #[error("invalid phase-space signature: {0}")]
    Signature(String),
}

struct Factors<'a>(&'a Monomial);

impl Serialize for Factors<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.0.factors().len()))?;
        for (s, e) in self.0.factors() {
            seq.serialize_element(&(s.to_string(), e))?;
        }
        seq.end()
    }
}

struct Monomials<'a, C>(&'a Poly<C>);

impl<C: Coeff + fmt::Display> Serialize for Monomials<'_, C> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
        for (m, c) in self.0.terms().rev() {
            let mut entry = std::collections::BTreeMap::new();
            entry.insert("coeff", serde_json::Value::String(c.to_string()));
            entry.insert("factors", serde_json::to_value(Factors(m)).map_err(serde::ser::Error::custom)?);
            seq.serialize_element(&entry)?;
        }
        seq.end()
    }
}

/// Serialized both as canonical text and as a monomial list.
impl<C: Coeff + fmt::Display> Serialize for Poly<C> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(2))?;
        map.serialize_entry("text", &self.to_string())?;
        map.serialize_entry("monomials", &Monomials(self))?;
        map.end()
    }
}
