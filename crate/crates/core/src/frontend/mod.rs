//! Model sources: the `.hjm` parser, index expansion to scalar systems,
//! and the builtin model library.

mod ast;
mod builtin;
mod expand;
mod lexer;
mod parser;
mod tables;

use thiserror::Error;

pub use ast::{CoordinateDecl, CouplingDecl, IndexArg, IndexDomain, ModelExpr, ModelSpec, Span, TableDecl};
pub use builtin::{builtin_model, builtin_names, builtin_source};
pub use expand::{expand_indices, FlatModel};
pub use tables::{StructureTable, TableSource};

use crate::symcore::SymError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{span}: syntax error: {message}")]
    Syntax { span: Span, message: String },
    #[error("{span}: unsupported expression: {message}")]
    Unsupported { span: Span, message: String },
    #[error("{span}: undeclared index `{name}`")]
    UndeclaredIndex { span: Span, name: String },
    #[error("{span}: index `{name}` is not bound by an enclosing sum")]
    UnboundIndex { span: Span, name: String },
    #[error("{span}: unknown symbol `{name}`")]
    UnknownSymbol { span: Span, name: String },
    #[error("{span}: `{name}` takes {expected} indices, found {found}")]
    Arity { span: Span, name: String, expected: usize, found: usize },
    #[error("{span}: duplicate declaration of {name}")]
    Duplicate { span: Span, name: String },
    #[error("table `{name}` is not totally antisymmetric at entry {entry:?}")]
    NotAntisymmetric { name: String, entry: Vec<u32> },
    #[error("table `{name}` violates the Jacobi identity at (a,b,c,d) = {indices:?}")]
    JacobiViolation { name: String, indices: [u32; 4] },
    #[error("index {value} of `{symbol}` is outside its declared range {lo}..{hi}")]
    IndexOutOfRange { symbol: String, value: u32, lo: u32, hi: u32 },
    #[error("two distinct symbols render as `{0}`")]
    NameCollision(String),
    #[error("unknown builtin model `{0}`")]
    UnknownModel(String),
    #[error("model `{model}` requires a value for coupling `{name}`")]
    MissingCoupling { model: String, name: String },
    #[error("model `{model}` has no coupling `{name}`")]
    UnknownParameter { model: String, name: String },
    #[error(transparent)]
    Symbolic(#[from] SymError),
}

impl ModelError {
    pub(crate) fn syntax(span: Span, message: impl Into<String>) -> Self {
        ModelError::Syntax { span, message: message.into() }
    }

    /// True for division and other constructs outside the polynomial language.
    pub fn is_unsupported(&self) -> bool {
        matches!(self, ModelError::Unsupported { .. } | ModelError::Symbolic(SymError::Unsupported(_)))
    }
}

/// Parses and validates a `.hjm` source.
pub fn parse_model(text: &str) -> Result<ModelSpec, ModelError> {
    parser::Parser::new(text)?.parse_model()
}

#[cfg(test)]
mod tests;
