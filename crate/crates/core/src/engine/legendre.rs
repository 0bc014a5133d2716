use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::EngineError;
use crate::frontend::FlatModel;
use crate::symcore::{solve_linear_symbolic, GenericRankWarning, Symbol};
use crate::Expr;

/// Outcome of the (possibly singular) Legendre transform.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LegendreResult {
    /// `p_i = ∂L/∂dot(q_i)` for every coordinate, in coordinate order.
    pub momenta: Vec<(Symbol, Expr)>,
    /// Velocity symbol → its expression in phase-space variables. May still
    /// mention velocities of unsolved coordinates; those cancel in `H₀`.
    pub solved: Vec<(Symbol, Expr)>,
    /// Coordinates whose velocities could not be solved for; these become
    /// parameters of the Hamilton–Jacobi system.
    pub unsolved: Vec<Symbol>,
    /// `(q_μ, H′_μ = p_μ − φ_μ)` for each unsolved coordinate.
    pub primary: Vec<(Symbol, Expr)>,
    pub rank: usize,
    pub warnings: Vec<GenericRankWarning>,
}

impl LegendreResult {
    /// `p_μ → φ_μ` for each unsolved coordinate.
    pub fn constraint_values(&self) -> BTreeMap<Symbol, Expr> {
        self.primary
            .iter()
            .map(|(q, h)| {
                let p = q.momentum();
                (p.clone(), Expr::symbol(p) - h)
            })
            .collect()
    }

    pub fn solved_coordinates(&self) -> Vec<Symbol> {
        self.solved.iter().map(|(v, _)| v.base_coordinate()).collect()
    }
}

pub fn legendre(model: &FlatModel) -> Result<LegendreResult, EngineError> {
    let velocities = model.velocities();
    let vset: BTreeSet<Symbol> = velocities.iter().cloned().collect();
    let l = &model.lagrangian;
    if l.degree_in_set(&vset) > 2 {
        return Err(EngineError::Unsupported(format!(
            "Lagrangian has degree {} in the velocities; at most 2 is supported",
            l.degree_in_set(&vset)
        )));
    }

    let momenta: Vec<(Symbol, Expr)> =
        model.coordinates.iter().zip(&velocities).map(|(q, v)| (q.momentum(), l.diff(v))).collect();
    let equations: Vec<Expr> = momenta.iter().map(|(p, d)| Expr::symbol(p.clone()) - d).collect();
    let sol = solve_linear_symbolic(&equations, &velocities)?;

    let unsolved: Vec<Symbol> = sol.unsolved.iter().map(Symbol::base_coordinate).collect();
    let unsolved_momenta: Vec<Symbol> = unsolved.iter().map(Symbol::momentum).collect();
    let prim = solve_linear_symbolic(&sol.relations, &unsolved_momenta)?;
    if !prim.unsolved.is_empty() || !prim.relations.is_empty() {
        return Err(EngineError::Unsupported(format!(
            "momentum relations {} cannot be solved for the momenta of {}",
            list(&sol.relations),
            list(&unsolved)
        )));
    }
    let primary: Vec<(Symbol, Expr)> =
        unsolved.iter().zip(&prim.solved).map(|(q, (p, phi))| (q.clone(), Expr::symbol(p.clone()) - phi)).collect();

    let mut warnings = sol.warnings.clone();
    warnings.extend(prim.warnings);
    let result = LegendreResult { momenta, rank: sol.solved.len(), solved: sol.solved, unsolved, primary, warnings };
    check_round_trip(&result, l)?;
    Ok(result)
}

/// Substituting the solved velocities back into every momentum definition
/// must give an identity once `p_μ = φ_μ`.
fn check_round_trip(leg: &LegendreResult, l: &Expr) -> Result<(), EngineError> {
    let on_velocities: BTreeMap<Symbol, Expr> = leg.solved.iter().cloned().collect();
    let on_surface = leg.constraint_values();
    for (p, def) in &leg.momenta {
        let residual = (Expr::symbol(p.clone()) - def.substitute(&on_velocities)).substitute(&on_surface);
        if !residual.is_zero() {
            return Err(EngineError::Inconsistent(format!(
                "Legendre round trip for {p} leaves `{residual}` (Lagrangian `{l}`)"
            )));
        }
    }
    Ok(())
}

pub(crate) fn list(items: &[impl std::fmt::Display]) -> String {
    let parts: Vec<String> = items.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", parts.join(", "))
}
