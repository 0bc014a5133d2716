use std::collections::BTreeMap;

use serde::Serialize;

use super::{EngineError, LegendreResult};
use crate::frontend::FlatModel;
use crate::symcore::{poisson_bracket, PhaseSpaceSignature, Symbol, SymbolKind};
use crate::Expr;

/// `H₀ = Σ p_a w_a + Σ p_μ dot(q_μ) − L(dot(q_a) = w_a)` on `p_μ = φ_μ`.
pub fn build_h0(leg: &LegendreResult, model: &FlatModel) -> Result<Expr, EngineError> {
    let on_velocities: BTreeMap<Symbol, Expr> = leg.solved.iter().cloned().collect();
    let mut h = -model.lagrangian.substitute(&on_velocities);
    for (v, w) in &leg.solved {
        h = h + Expr::symbol(v.base_coordinate().momentum()) * w;
    }
    for q in &leg.unsolved {
        h = h + Expr::symbol(q.momentum()) * Expr::symbol(q.velocity());
    }
    let h = h.substitute(&leg.constraint_values());
    if let Some(v) = h.symbols().into_iter().find(|s| s.kind() == SymbolKind::Velocity) {
        return Err(EngineError::Inconsistent(format!("H0 still depends on {v}: `{h}`")));
    }
    Ok(h)
}

/// A Hamilton–Jacobi generator `H′_α` and the parameter it is attached to.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Generator {
    pub parameter: Symbol,
    pub expr: Expr,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HamiltonianSet {
    pub h0: Expr,
    /// `H′₀ = p_t + H₀` first, then one `H′_μ` per unsolved coordinate.
    pub generators: Vec<Generator>,
    pub signature: PhaseSpaceSignature,
}

impl HamiltonianSet {
    pub fn parameters(&self) -> Vec<Symbol> {
        self.generators.iter().map(|g| g.parameter.clone()).collect()
    }

    /// Brackets that see the parameters as coordinates with their own
    /// momenta; this is what variations along `t_α` use.
    pub fn extended_signature(&self) -> PhaseSpaceSignature {
        self.signature.extended()
    }

    pub fn bracket(&self, f: &Expr, g: &Expr) -> Expr {
        poisson_bracket(f, g, &self.extended_signature())
    }
}

pub fn build_hjpde(leg: &LegendreResult, h0: &Expr) -> HamiltonianSet {
    let t = Symbol::time();
    let mut generators = vec![Generator { parameter: t.clone(), expr: Expr::symbol(t.momentum()) + h0 }];
    generators.extend(leg.primary.iter().map(|(q, h)| Generator { parameter: q.clone(), expr: h.clone() }));
    let pairs = leg.solved_coordinates().into_iter().map(|q| (q.clone(), q.momentum())).collect();
    let mut parameters = vec![t];
    parameters.extend(leg.unsolved.iter().cloned());
    let signature = PhaseSpaceSignature::new(pairs, parameters).expect("coordinates and parameters are disjoint");
    HamiltonianSet { h0: h0.clone(), generators, signature }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowRow {
    pub variable: Symbol,
    /// One coefficient per parameter, aligned with
    /// [`TotalDifferentialSystem::parameters`].
    pub coefficients: Vec<Expr>,
}

/// `dx = Σ_α {x, H′_α} dt_α` for every canonical coordinate and momentum,
/// plus the momenta of the non-time parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TotalDifferentialSystem {
    pub parameters: Vec<Symbol>,
    pub rows: Vec<FlowRow>,
}

impl TotalDifferentialSystem {
    pub fn row(&self, variable: &Symbol) -> Option<&FlowRow> {
        self.rows.iter().find(|r| &r.variable == variable)
    }

    pub fn coefficient(&self, variable: &Symbol, parameter: &Symbol) -> Option<&Expr> {
        let k = self.parameters.iter().position(|p| p == parameter)?;
        self.row(variable).map(|r| &r.coefficients[k])
    }
}

pub fn derive_flow(hset: &HamiltonianSet) -> TotalDifferentialSystem {
    let sig = hset.extended_signature();
    let mut variables = Vec::new();
    for (q, p) in hset.signature.pairs() {
        variables.push(q.clone());
        variables.push(p.clone());
    }
    variables.extend(hset.signature.parameters().iter().skip(1).map(Symbol::momentum));
    let rows = variables
        .into_iter()
        .map(|x| {
            let xe = Expr::symbol(x.clone());
            let coefficients = hset.generators.iter().map(|g| poisson_bracket(&xe, &g.expr, &sig)).collect();
            FlowRow { variable: x, coefficients }
        })
        .collect();
    TotalDifferentialSystem { parameters: hset.parameters(), rows }
}

/// Brackets `{H′_α, H′_β}` for `α < β`, the integrability conditions
/// proper. Returned unreduced.
pub fn generator_brackets(hset: &HamiltonianSet) -> Vec<(usize, usize, Expr)> {
    let n = hset.generators.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let v = hset.bracket(&hset.generators[a].expr, &hset.generators[b].expr);
            if !v.is_zero() {
                out.push((a, b, v));
            }
        }
    }
    out
}
