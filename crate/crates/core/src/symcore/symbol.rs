use std::fmt;

use serde::{Serialize, Serializer};

/// Role of a symbol in phase space. The declaration order here is the
/// primary key of the symbol total order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolKind {
    Coordinate,
    Velocity,
    Momentum,
    Parameter,
    Coupling,
    Time,
}

/// A scalar symbol. Equality and ordering are structural over
/// `(kind, name, indices)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    kind: SymbolKind,
    name: String,
    indices: Vec<u32>,
}

impl Symbol {
    pub fn new(kind: SymbolKind, name: impl Into<String>, indices: Vec<u32>) -> Self {
        Symbol { kind, name: name.into(), indices }
    }

    pub fn coordinate(name: impl Into<String>) -> Self {
        Self::new(SymbolKind::Coordinate, name, Vec::new())
    }

    pub fn indexed(name: impl Into<String>, indices: &[u32]) -> Self {
        Self::new(SymbolKind::Coordinate, name, indices.to_vec())
    }

    pub fn parameter(name: impl Into<String>) -> Self {
        Self::new(SymbolKind::Parameter, name, Vec::new())
    }

    pub fn coupling(name: impl Into<String>) -> Self {
        Self::new(SymbolKind::Coupling, name, Vec::new())
    }

    pub fn time() -> Self {
        Self::new(SymbolKind::Time, "t", Vec::new())
    }

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    fn with_kind(&self, kind: SymbolKind) -> Self {
        Symbol { kind, name: self.name.clone(), indices: self.indices.clone() }
    }

    /// Conjugate momentum of a coordinate (or of the time symbol).
    pub fn momentum(&self) -> Self {
        self.with_kind(SymbolKind::Momentum)
    }

    /// Velocity mark `dot(q)` of a coordinate.
    pub fn velocity(&self) -> Self {
        self.with_kind(SymbolKind::Velocity)
    }

    /// Coordinate that a momentum or velocity belongs to.
    pub fn base_coordinate(&self) -> Self {
        self.with_kind(SymbolKind::Coordinate)
    }

    /// Position of a momentum's configuration partner: the time symbol for
    /// `p_t`, a coordinate otherwise.
    pub fn conjugate(&self) -> Option<Self> {
        match self.kind {
            SymbolKind::Momentum if self.name == "t" && self.indices.is_empty() => Some(Symbol::time()),
            SymbolKind::Momentum => Some(self.base_coordinate()),
            SymbolKind::Coordinate => Some(self.momentum()),
            SymbolKind::Time => Some(self.momentum()),
            _ => None,
        }
    }

    fn index_suffix(&self) -> String {
        if self.indices.is_empty() {
            String::new()
        } else {
            let parts: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
            format!("[{}]", parts.join(","))
        }
    }
}

/// ASCII name of the momentum conjugate to a coordinate base name:
/// `q1 -> p1`, `A0 -> pi0`, anything else `x -> p_x`.
pub fn momentum_name(base: &str) -> String {
    if let Some(rest) = base.strip_prefix('q') {
        format!("p{rest}")
    } else if let Some(rest) = base.strip_prefix('A') {
        format!("pi{rest}")
    } else {
        format!("p_{base}")
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let suffix = self.index_suffix();
        match self.kind {
            SymbolKind::Coordinate | SymbolKind::Parameter | SymbolKind::Coupling | SymbolKind::Time => {
                write!(f, "{}{}", self.name, suffix)
            }
            SymbolKind::Velocity => write!(f, "dot({}{})", self.name, suffix),
            SymbolKind::Momentum => write!(f, "{}{}", momentum_name(&self.name), suffix),
        }
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}
