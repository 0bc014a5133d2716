//! Canonical action, the gauge-fixing-free path-integral report, and the
//! Faddeev measure it is compared against.

use serde::Serialize;
use thiserror::Error;

use crate::engine::{ConstraintChain, ConstraintClass, HamiltonianSet, TotalDifferentialSystem};
use crate::symcore::{poisson_bracket, PhaseSpaceSignature, Symbol};
use crate::Expr;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CanonicalAction {
    /// `dz = Σ_α (−H_α + Σ_a p_a ∂H′_α/∂p_a) dt_α`, one entry per parameter.
    pub integrand: Vec<(Symbol, Expr)>,
    /// `Σ_a p_a dot(q_a) − H₀`, the phase-space Lagrangian.
    pub hamiltonian_form: Expr,
}

impl CanonicalAction {
    pub fn along(&self, parameter: &Symbol) -> Option<&Expr> {
        self.integrand.iter().find(|(t, _)| t == parameter).map(|(_, e)| e)
    }

    pub fn time_integrand(&self) -> &Expr {
        &self.integrand[0].1
    }
}

pub fn canonical_action(hset: &HamiltonianSet, flow: &TotalDifferentialSystem) -> CanonicalAction {
    let pairs = hset.signature.pairs();
    let integrand = hset
        .generators
        .iter()
        .enumerate()
        .map(|(k, g)| {
            // H_α = H′_α − p_α
            let h = &g.expr - &Expr::symbol(g.parameter.momentum());
            let mut dz = -h;
            for (q, p) in pairs {
                let rate = flow.coefficient(q, &g.parameter).cloned().unwrap_or_else(|| g.expr.diff(p));
                debug_assert_eq!(rate, g.expr.diff(p), "flow row {k} out of step with generator");
                dz = dz + Expr::symbol(p.clone()) * rate;
            }
            (g.parameter.clone(), dz)
        })
        .collect();
    let mut hamiltonian_form = -hset.h0.clone();
    for (q, p) in pairs {
        hamiltonian_form = hamiltonian_form + Expr::symbol(p.clone()) * Expr::symbol(q.velocity());
    }
    CanonicalAction { integrand, hamiltonian_form }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Integrability {
    Integrable,
    NotIntegrable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathIntegralReport {
    /// Canonical pairs integrated over.
    pub variables: Vec<(Symbol, Symbol)>,
    /// Time and the coordinates promoted to parameters; never integrated.
    pub externals: Vec<Symbol>,
    pub integrand: Expr,
    pub status: Integrability,
    pub gauge_conditions: usize,
    pub delta_factors: Vec<String>,
    pub determinants: Vec<String>,
    pub notes: Vec<String>,
}

pub fn path_integral_report(
    act: &CanonicalAction,
    chain: &ConstraintChain,
    hset: &HamiltonianSet,
) -> PathIntegralReport {
    let status = if chain.is_closed() { Integrability::Integrable } else { Integrability::NotIntegrable };
    let mut notes = Vec::new();
    if status == Integrability::NotIntegrable {
        notes.push("constraint chain is open: no measure claim is made".to_string());
    } else {
        notes.push("no gauge conditions, delta functions or determinants enter the measure".to_string());
    }
    PathIntegralReport {
        variables: hset.signature.pairs().to_vec(),
        externals: hset.signature.parameters().to_vec(),
        integrand: act.time_integrand().clone(),
        status,
        gauge_conditions: 0,
        delta_factors: Vec::new(),
        determinants: Vec::new(),
        notes,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaugeMeasureReport {
    pub constraints: Vec<Expr>,
    pub gauges: Vec<Expr>,
    /// `{φ^α, χ^β}`
    pub matrix: Vec<Vec<Expr>>,
    pub determinant: Expr,
    pub delta_factors: Vec<String>,
    pub liouville: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("no constraints to fix: the system is regular")]
    NoConstraints,
    #[error("constraint chain is open; classes are unresolved")]
    ChainOpen,
    #[error("second-class constraints present: {}", .constraints.join(", "))]
    SecondClass { constraints: Vec<String> },
    #[error("{gauges} gauge conditions for {constraints} first-class constraints")]
    CountMismatch { constraints: usize, gauges: usize },
    #[error("inadmissible gauge: det {{phi, chi}} vanishes identically")]
    Inadmissible { matrix: Vec<Vec<String>> },
}

impl MeasureError {
    /// Inadmissible or miscounted gauge choice, as opposed to a model that
    /// admits no Faddeev measure at all.
    pub fn is_gauge_problem(&self) -> bool {
        matches!(self, MeasureError::Inadmissible { .. } | MeasureError::CountMismatch { .. })
    }
}

/// Determinant by cofactor expansion along row `row`.
pub fn determinant(m: &[Vec<Expr>], row: usize) -> Expr {
    let n = m.len();
    match n {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = Expr::zero();
            for j in 0..n {
                if m[row][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Expr>> = (0..n)
                    .filter(|&i| i != row)
                    .map(|i| (0..n).filter(|&k| k != j).map(|k| m[i][k].clone()).collect())
                    .collect();
                let term = &m[row][j] * &determinant(&minor, 0);
                acc = if (row + j) % 2 == 0 { acc + term } else { acc - term };
            }
            acc
        }
    }
}

pub fn faddeev_measure(
    chain: &ConstraintChain,
    gauges: &[Expr],
    sig: &PhaseSpaceSignature,
) -> Result<GaugeMeasureReport, MeasureError> {
    if chain.constraints.is_empty() {
        return Err(MeasureError::NoConstraints);
    }
    if !chain.is_closed() {
        return Err(MeasureError::ChainOpen);
    }
    let second: Vec<String> = chain
        .constraints
        .iter()
        .filter(|c| c.class != ConstraintClass::First)
        .map(|c| c.expression.to_string())
        .collect();
    if !second.is_empty() {
        return Err(MeasureError::SecondClass { constraints: second });
    }
    let phis = chain.expressions();
    if gauges.len() != phis.len() {
        return Err(MeasureError::CountMismatch { constraints: phis.len(), gauges: gauges.len() });
    }
    let matrix: Vec<Vec<Expr>> =
        phis.iter().map(|f| gauges.iter().map(|c| poisson_bracket(f, c, sig)).collect()).collect();
    let det = determinant(&matrix, 0);
    let check = determinant(&matrix, matrix.len() - 1);
    assert_eq!(det, check, "cofactor expansions disagree");
    if det.is_zero() {
        return Err(MeasureError::Inadmissible {
            matrix: matrix.iter().map(|r| r.iter().map(|e| e.to_string()).collect()).collect(),
        });
    }
    let mut delta_factors: Vec<String> = gauges.iter().map(|c| format!("delta({c})")).collect();
    delta_factors.extend(phis.iter().map(|f| format!("delta({f})")));
    let vars: Vec<String> = sig.pairs().iter().map(|(q, p)| format!("d{q} d{p}")).collect();
    Ok(GaugeMeasureReport {
        constraints: phis,
        gauges: gauges.to_vec(),
        matrix,
        determinant: det,
        delta_factors,
        liouville: format!("prod {}", vars.join(" ")),
    })
}

#[cfg(test)]
mod tests;
