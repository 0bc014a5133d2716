use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::ast::{IndexArg, ModelExpr, ModelSpec};
use super::parser::Parser;
use super::ModelError;
use crate::symcore::{normalize, Symbol, Term};
use crate::{Expr, Rational};

/// Fully index-expanded Lagrangian system.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlatModel {
    pub name: String,
    /// Scalar coordinates in the fixed symbol order.
    pub coordinates: Vec<Symbol>,
    /// Couplings with their values, if fixed. Valued couplings are already
    /// substituted into the Lagrangian.
    #[serde(serialize_with = "serialize_couplings")]
    pub couplings: Vec<(Symbol, Option<Rational>)>,
    pub lagrangian: Expr,
}

fn serialize_couplings<S: serde::Serializer>(c: &[(Symbol, Option<Rational>)], s: S) -> Result<S::Ok, S::Error> {
    let map: BTreeMap<String, Option<String>> =
        c.iter().map(|(k, v)| (k.to_string(), v.as_ref().map(|r| r.to_string()))).collect();
    map.serialize(s)
}

impl FlatModel {
    pub fn velocities(&self) -> Vec<Symbol> {
        self.coordinates.iter().map(Symbol::velocity).collect()
    }

    pub fn momenta(&self) -> Vec<Symbol> {
        self.coordinates.iter().map(Symbol::momentum).collect()
    }

    /// Couplings still symbolic in the Lagrangian.
    pub fn free_couplings(&self) -> Vec<Symbol> {
        self.couplings.iter().filter(|(_, v)| v.is_none()).map(|(s, _)| s.clone()).collect()
    }

    /// Rendered name → symbol for everything an expression over this model
    /// may mention.
    pub fn symbol_table(&self) -> HashMap<String, Symbol> {
        let mut out = HashMap::new();
        for q in &self.coordinates {
            for s in [q.clone(), q.momentum(), q.velocity()] {
                out.insert(s.to_string(), s);
            }
        }
        for (c, _) in &self.couplings {
            out.insert(c.to_string(), c.clone());
        }
        out.insert("t".into(), Symbol::time());
        out.insert(Symbol::time().momentum().to_string(), Symbol::time().momentum());
        out
    }

    /// Parses a scalar expression written with this model's rendered
    /// names, e.g. `A0[1]`, `pi[1,2]`, `q2 + 1/2*p1^2`.
    pub fn parse_expr(&self, text: &str) -> Result<Expr, ModelError> {
        let mut parser = Parser::new(text)?;
        let tree = parser.expr()?;
        parser.finish()?;
        let table = self.symbol_table();
        let values: BTreeMap<Symbol, Rational> =
            self.couplings.iter().filter_map(|(s, v)| v.clone().map(|v| (s.clone(), v))).collect();
        let term = lower_scalar(&tree, &table, &values)?;
        normalize(&term).map_err(ModelError::from)
    }
}

fn lower_scalar(
    e: &ModelExpr,
    table: &HashMap<String, Symbol>,
    values: &BTreeMap<Symbol, Rational>,
) -> Result<Term, ModelError> {
    let rec = |x: &ModelExpr| lower_scalar(x, table, values);
    Ok(match e {
        ModelExpr::Num(r) => Term::Num(r.clone()),
        ModelExpr::Ref { name, indices, span } | ModelExpr::Dot { name, indices, span } => {
            let mut lits = Vec::new();
            for i in indices {
                match i {
                    IndexArg::Lit(n) => lits.push(n.to_string()),
                    IndexArg::Var(v) => return Err(ModelError::UnboundIndex { span: *span, name: v.clone() }),
                }
            }
            let mut key = if lits.is_empty() { name.clone() } else { format!("{name}[{}]", lits.join(",")) };
            if matches!(e, ModelExpr::Dot { .. }) {
                key = format!("dot({key})");
            }
            let s = table.get(&key).ok_or_else(|| ModelError::UnknownSymbol { span: *span, name: key.clone() })?;
            match values.get(s) {
                Some(v) => Term::Num(v.clone()),
                None => Term::Sym(s.clone()),
            }
        }
        ModelExpr::Table { name, span, .. } | ModelExpr::Sum { index: name, span, .. } => {
            return Err(ModelError::UnknownSymbol { span: *span, name: name.clone() })
        }
        ModelExpr::Add(a, b) => Term::Add(vec![rec(a)?, rec(b)?]),
        ModelExpr::Sub(a, b) => Term::Sub(Box::new(rec(a)?), Box::new(rec(b)?)),
        ModelExpr::Mul(a, b) => Term::Mul(vec![rec(a)?, rec(b)?]),
        ModelExpr::Div(a, b) => Term::Div(Box::new(rec(a)?), Box::new(rec(b)?)),
        ModelExpr::Neg(a) => Term::Neg(Box::new(rec(a)?)),
        ModelExpr::Pow(a, n) => Term::Pow(Box::new(rec(a)?), *n),
    })
}

struct Expander<'a> {
    spec: &'a ModelSpec,
    env: Vec<(String, u32)>,
}

impl Expander<'_> {
    fn index_value(&self, arg: &IndexArg) -> u32 {
        match arg {
            IndexArg::Lit(n) => *n,
            // validated at parse time: every variable is bound by a sum
            IndexArg::Var(v) => self.env.iter().rev().find(|(k, _)| k == v).map(|(_, x)| *x).unwrap(),
        }
    }

    fn coordinate(&self, name: &str, indices: &[IndexArg]) -> Result<Symbol, ModelError> {
        let decl = self
            .spec
            .coordinate(name)
            .ok_or_else(|| ModelError::UnknownSymbol { span: Default::default(), name: name.to_string() })?;
        let mut values = Vec::with_capacity(indices.len());
        for (arg, dom_name) in indices.iter().zip(&decl.indices) {
            let v = self.index_value(arg);
            let dom = self.spec.domain(dom_name).expect("validated domain");
            if v < dom.lo || v > dom.hi {
                return Err(ModelError::IndexOutOfRange { symbol: name.to_string(), value: v, lo: dom.lo, hi: dom.hi });
            }
            values.push(v);
        }
        Ok(Symbol::indexed(name, &values))
    }

    fn lower(&mut self, e: &ModelExpr) -> Result<Term, ModelError> {
        Ok(match e {
            ModelExpr::Num(r) => Term::Num(r.clone()),
            ModelExpr::Ref { name, indices, .. } => match self.spec.coupling(name) {
                Some(c) => match &c.value {
                    Some(v) => Term::Num(v.clone()),
                    None => Term::Sym(Symbol::coupling(name.clone())),
                },
                None => Term::Sym(self.coordinate(name, indices)?),
            },
            ModelExpr::Dot { name, indices, .. } => Term::Sym(self.coordinate(name, indices)?.velocity()),
            ModelExpr::Table { name, args, .. } => {
                let key: Vec<u32> = args.iter().map(|a| self.index_value(a)).collect();
                Term::Num(self.spec.table(name).expect("validated table").get(&key))
            }
            ModelExpr::Sum { index, body, .. } => {
                let dom = self.spec.domain(index).expect("validated domain").clone();
                let mut items = Vec::new();
                for v in dom.lo..=dom.hi {
                    self.env.push((index.clone(), v));
                    let item = self.lower(body);
                    self.env.pop();
                    items.push(item?);
                }
                Term::Add(items)
            }
            ModelExpr::Add(a, b) => Term::Add(vec![self.lower(a)?, self.lower(b)?]),
            ModelExpr::Sub(a, b) => Term::Sub(Box::new(self.lower(a)?), Box::new(self.lower(b)?)),
            ModelExpr::Mul(a, b) => Term::Mul(vec![self.lower(a)?, self.lower(b)?]),
            ModelExpr::Div(a, b) => Term::Div(Box::new(self.lower(a)?), Box::new(self.lower(b)?)),
            ModelExpr::Neg(a) => Term::Neg(Box::new(self.lower(a)?)),
            ModelExpr::Pow(a, n) => Term::Pow(Box::new(self.lower(a)?), *n),
        })
    }
}

/// Expands every indexed coordinate, sum and table application into
/// scalars and normalizes the Lagrangian.
pub fn expand_indices(spec: &ModelSpec) -> Result<FlatModel, ModelError> {
    let mut coordinates = Vec::new();
    for decl in &spec.coordinates {
        let domains: Vec<_> = decl.indices.iter().map(|d| spec.domain(d).expect("validated domain")).collect();
        let mut combos: Vec<Vec<u32>> = vec![Vec::new()];
        for dom in &domains {
            combos = combos
                .into_iter()
                .flat_map(|prefix| {
                    (dom.lo..=dom.hi).map(move |v| {
                        let mut next = prefix.clone();
                        next.push(v);
                        next
                    })
                })
                .collect();
        }
        coordinates.extend(combos.into_iter().map(|idx| Symbol::indexed(decl.name.clone(), &idx)));
    }
    coordinates.sort();

    let couplings: Vec<(Symbol, Option<Rational>)> =
        spec.couplings.iter().map(|c| (Symbol::coupling(c.name.clone()), c.value.clone())).collect();

    let mut expander = Expander { spec, env: Vec::new() };
    let term = expander.lower(&spec.lagrangian)?;
    let lagrangian = normalize(&term)?;

    let model = FlatModel { name: spec.name.clone(), coordinates, couplings, lagrangian };
    let mut seen: HashMap<String, Symbol> = HashMap::new();
    for s in model
        .coordinates
        .iter()
        .flat_map(|q| [q.clone(), q.momentum()])
        .chain(model.couplings.iter().map(|(c, _)| c.clone()))
        .chain([Symbol::time(), Symbol::time().momentum()])
    {
        if let Some(prev) = seen.insert(s.to_string(), s.clone()) {
            if prev != s {
                return Err(ModelError::NameCollision(s.to_string()));
            }
        }
    }
    Ok(model)
}
