use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::engine::{
    Closure, Constraint, ConstraintChain, ConstraintClass, EngineError, ParameterRelation, Provenance,
};
use crate::frontend::FlatModel;
use crate::symcore::{poisson_bracket, solve_linear_symbolic, PhaseSpaceSignature, SurfaceReducer, Symbol, SymbolKind};
use crate::Expr;

const MAX_ROUNDS: usize = 20;

fn multiplier(k: usize) -> Symbol {
    Symbol::new(SymbolKind::Parameter, "lambda", vec![k as u32 + 1])
}

/// Textbook Dirac–Bergmann analysis, kept independent of the engine: its
/// own Legendre elimination (pivoting on the last velocity first), a total
/// Hamiltonian `H_c + λ_k φ_k`, and consistency `{φ, H_T} ≈ 0` solved for
/// the multipliers wherever possible.
pub fn dirac_oracle(model: &FlatModel) -> Result<ConstraintChain, EngineError> {
    let velocities: Vec<Symbol> = model.velocities().into_iter().rev().collect();
    let vset: BTreeSet<Symbol> = velocities.iter().cloned().collect();
    let l = &model.lagrangian;
    if l.degree_in_set(&vset) > 2 {
        return Err(EngineError::Unsupported("Lagrangian is more than quadratic in the velocities".into()));
    }
    let equations: Vec<Expr> =
        velocities.iter().map(|v| Expr::symbol(v.base_coordinate().momentum()) - l.diff(v)).collect();
    let sol = solve_linear_symbolic(&equations, &velocities)?;

    // free velocities drop out of H_c on the primary surface; set them to 0
    let zeros: BTreeMap<Symbol, Expr> = sol.unsolved.iter().map(|v| (v.clone(), Expr::zero())).collect();
    let mut on_velocities = zeros.clone();
    for (v, w) in &sol.solved {
        on_velocities.insert(v.clone(), w.substitute(&zeros));
    }
    let mut hc = -l.clone();
    for v in &velocities {
        hc = hc + Expr::symbol(v.base_coordinate().momentum()) * Expr::symbol(v.clone());
    }
    let hc = hc.substitute(&on_velocities);

    let sig = PhaseSpaceSignature::canonical(&model.coordinates);
    let mut phis: Vec<Expr> = sol.relations.clone();
    let mut generation = vec![0usize; phis.len()];
    let primary = phis.len();
    let mut ht = hc.clone();
    let lambdas: Vec<Symbol> = (0..primary).map(multiplier).collect();
    for (k, phi) in phis.iter().enumerate() {
        ht = ht + Expr::symbol(lambdas[k].clone()) * phi;
    }

    let mut closure = Closure::Open;
    let mut fixed = Vec::new();
    for round in 1..=MAX_ROUNDS {
        let reducer = SurfaceReducer::new(&phis);
        let mut consistency = Vec::new();
        for phi in &phis {
            // reduce each multiplier coefficient and the free part separately
            let parts = split_affine(&poisson_bracket(phi, &ht, &sig), &lambdas);
            let mut eq = reducer.reduce(&parts[lambdas.len()]).remainder;
            for (lam, part) in lambdas.iter().zip(&parts) {
                eq = eq + reducer.reduce(part).remainder * Expr::symbol(lam.clone());
            }
            consistency.push(eq);
        }
        let solved = solve_linear_symbolic(&consistency, &lambdas)?;
        fixed = solved.solved.clone();
        let mut added = false;
        for rel in solved.relations {
            let current = SurfaceReducer::new(&phis);
            if !current.reduces_to_zero(&rel) {
                phis.push(rel);
                generation.push(round);
                added = true;
            }
        }
        if !added {
            closure = Closure::Closed;
            break;
        }
    }

    let reducer = SurfaceReducer::new(&phis);
    let n = phis.len();
    let matrix: Vec<Vec<Expr>> =
        (0..n).map(|i| (0..n).map(|j| poisson_bracket(&phis[i], &phis[j], &sig)).collect()).collect();
    let constraints = phis
        .iter()
        .zip(&generation)
        .enumerate()
        .map(|(i, (phi, g))| Constraint {
            expression: phi.clone(),
            generation: *g,
            provenance: Provenance::Variation { constraint: i, along: Symbol::time() },
            class: if closure != Closure::Closed {
                ConstraintClass::Unresolved
            } else if matrix[i].iter().all(|b| reducer.reduces_to_zero(b)) {
                ConstraintClass::First
            } else {
                ConstraintClass::Second
            },
        })
        .collect();
    let generations = generation.iter().max().map(|g| g + 1).unwrap_or(0);
    Ok(ConstraintChain {
        constraints,
        generations,
        closure,
        certificates: Vec::new(),
        parameter_relations: fixed.into_iter().map(|(parameter, rate)| ParameterRelation { parameter, rate }).collect(),
        bracket_matrix: matrix,
        warnings: solved_warnings(&sol.warnings),
    })
}

fn solved_warnings(w: &[crate::symcore::GenericRankWarning]) -> Vec<String> {
    w.iter().map(|w| format!("{} solved at generic rank (pivot `{}`)", w.unknown, w.pivot)).collect()
}

/// Coefficients of each unknown, then the unknown-free part.
fn split_affine(e: &Expr, unknowns: &[Symbol]) -> Vec<Expr> {
    let mut rest = e.clone();
    let mut parts = Vec::with_capacity(unknowns.len() + 1);
    for u in unknowns {
        let mut c = rest.collect(u);
        parts.push(if c.len() > 1 { c.swap_remove(1) } else { Expr::zero() });
        rest = c.swap_remove(0);
    }
    parts.push(rest);
    parts
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Verdict {
    Equivalent,
    NotEquivalent,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainComparison {
    pub verdict: Verdict,
    /// Members of the first chain not reducing to zero modulo the second.
    pub unmatched_left: Vec<Expr>,
    pub unmatched_right: Vec<Expr>,
}

/// Surface equality by mutual reduction.
pub fn compare_chains(a: &[Expr], b: &[Expr]) -> ChainComparison {
    let ra = SurfaceReducer::new(a);
    let rb = SurfaceReducer::new(b);
    let unmatched_left: Vec<Expr> = a.iter().filter(|x| !rb.reduces_to_zero(x)).cloned().collect();
    let unmatched_right: Vec<Expr> = b.iter().filter(|x| !ra.reduces_to_zero(x)).cloned().collect();
    let verdict = if unmatched_left.is_empty() && unmatched_right.is_empty() {
        Verdict::Equivalent
    } else {
        Verdict::NotEquivalent
    };
    ChainComparison { verdict, unmatched_left, unmatched_right }
}
