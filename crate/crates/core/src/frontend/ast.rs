use std::fmt;

use num_traits::One;

use super::tables::StructureTable;
use crate::Rational;

/// Source position. Spans never participate in structural equality.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum IndexArg {
    Var(String),
    Lit(u32),
}

impl fmt::Display for IndexArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexArg::Var(v) => write!(f, "{v}"),
            IndexArg::Lit(n) => write!(f, "{n}"),
        }
    }
}

/// Expression tree as written in a model source, before index expansion.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelExpr {
    Num(Rational),
    /// Coordinate or coupling reference, optionally indexed.
    Ref {
        name: String,
        indices: Vec<IndexArg>,
        span: Span,
    },
    /// Velocity mark on a coordinate reference.
    Dot {
        name: String,
        indices: Vec<IndexArg>,
        span: Span,
    },
    /// Structure-constant table application `f(a,b,c)`.
    Table {
        name: String,
        args: Vec<IndexArg>,
        span: Span,
    },
    Sum {
        index: String,
        body: Box<ModelExpr>,
        span: Span,
    },
    Add(Box<ModelExpr>, Box<ModelExpr>),
    Sub(Box<ModelExpr>, Box<ModelExpr>),
    Mul(Box<ModelExpr>, Box<ModelExpr>),
    Div(Box<ModelExpr>, Box<ModelExpr>),
    Neg(Box<ModelExpr>),
    Pow(Box<ModelExpr>, i64),
}

impl ModelExpr {
    fn precedence(&self) -> u8 {
        match self {
            ModelExpr::Add(..) | ModelExpr::Sub(..) => 1,
            ModelExpr::Mul(..) | ModelExpr::Div(..) => 2,
            ModelExpr::Num(r) if !r.is_integer() => 2,
            ModelExpr::Neg(..) => 3,
            ModelExpr::Pow(..) => 4,
            _ => 5,
        }
    }

    /// True when the tree mentions no symbol or table.
    pub fn is_constant(&self) -> bool {
        match self {
            ModelExpr::Num(_) => true,
            ModelExpr::Ref { .. } | ModelExpr::Dot { .. } | ModelExpr::Table { .. } => false,
            ModelExpr::Sum { body, .. } => body.is_constant(),
            ModelExpr::Add(a, b) | ModelExpr::Sub(a, b) | ModelExpr::Mul(a, b) | ModelExpr::Div(a, b) => {
                a.is_constant() && b.is_constant()
            }
            ModelExpr::Neg(a) | ModelExpr::Pow(a, _) => a.is_constant(),
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, child: &ModelExpr, min: u8) -> fmt::Result {
        if child.precedence() < min {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

fn write_indices(f: &mut fmt::Formatter<'_>, open: char, idx: &[IndexArg], close: char) -> fmt::Result {
    let parts: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
    write!(f, "{open}{}{close}", parts.join(","))
}

impl fmt::Display for ModelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelExpr::Num(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            ModelExpr::Ref { name, indices, .. } => {
                write!(f, "{name}")?;
                if !indices.is_empty() {
                    write_indices(f, '[', indices, ']')?;
                }
                Ok(())
            }
            ModelExpr::Dot { name, indices, .. } => {
                write!(f, "dot({name}")?;
                if !indices.is_empty() {
                    write_indices(f, '[', indices, ']')?;
                }
                write!(f, ")")
            }
            ModelExpr::Table { name, args, .. } => {
                write!(f, "{name}")?;
                write_indices(f, '(', args, ')')
            }
            ModelExpr::Sum { index, body, .. } => write!(f, "sum({index}, {body})"),
            ModelExpr::Add(a, b) => {
                self.write_child(f, a, 1)?;
                write!(f, " + ")?;
                self.write_child(f, b, 2)
            }
            ModelExpr::Sub(a, b) => {
                self.write_child(f, a, 1)?;
                write!(f, " - ")?;
                self.write_child(f, b, 2)
            }
            ModelExpr::Mul(a, b) => {
                self.write_child(f, a, 2)?;
                write!(f, "*")?;
                self.write_child(f, b, 3)
            }
            ModelExpr::Div(a, b) => {
                self.write_child(f, a, 2)?;
                write!(f, "/")?;
                self.write_child(f, b, 3)
            }
            ModelExpr::Neg(a) => {
                write!(f, "-")?;
                self.write_child(f, a, 3)
            }
            ModelExpr::Pow(a, n) => {
                self.write_child(f, a, 5)?;
                write!(f, "^{n}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndexDomain {
    pub name: String,
    pub lo: u32,
    pub hi: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CouplingDecl {
    pub name: String,
    pub value: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableDecl {
    pub name: String,
    pub table: StructureTable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateDecl {
    pub name: String,
    /// Index-domain names, one per slot.
    pub indices: Vec<String>,
}

/// Validated model source.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub indices: Vec<IndexDomain>,
    pub couplings: Vec<CouplingDecl>,
    pub tables: Vec<TableDecl>,
    pub coordinates: Vec<CoordinateDecl>,
    pub lagrangian: ModelExpr,
}

impl ModelSpec {
    pub fn domain(&self, name: &str) -> Option<&IndexDomain> {
        self.indices.iter().find(|d| d.name == name)
    }

    pub fn coordinate(&self, name: &str) -> Option<&CoordinateDecl> {
        self.coordinates.iter().find(|c| c.name == name)
    }

    pub fn coupling(&self, name: &str) -> Option<&CouplingDecl> {
        self.couplings.iter().find(|c| c.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&StructureTable> {
        self.tables.iter().find(|t| t.name == name).map(|t| &t.table)
    }
}

fn signed(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "model \"{}\"", self.name)?;
        if !self.indices.is_empty() {
            let parts: Vec<String> = self.indices.iter().map(|d| format!("{} in {}..{}", d.name, d.lo, d.hi)).collect();
            writeln!(f, "indices: {}", parts.join(", "))?;
        }
        if !self.couplings.is_empty() {
            let parts: Vec<String> = self
                .couplings
                .iter()
                .map(|c| match &c.value {
                    Some(v) => format!("{} = {}", c.name, signed(v)),
                    None => c.name.clone(),
                })
                .collect();
            writeln!(f, "couplings: {}", parts.join(", "))?;
        }
        if !self.tables.is_empty() {
            let parts: Vec<String> = self.tables.iter().map(|t| format!("{} = {}", t.name, t.table)).collect();
            writeln!(f, "tables: {}", parts.join(", "))?;
        }
        let parts: Vec<String> = self
            .coordinates
            .iter()
            .map(|c| if c.indices.is_empty() { c.name.clone() } else { format!("{}[{}]", c.name, c.indices.join(",")) })
            .collect();
        writeln!(f, "coordinates: {}", parts.join(", "))?;
        writeln!(f, "lagrangian: {}", self.lagrangian)
    }
}
