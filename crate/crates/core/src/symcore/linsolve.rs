use std::collections::BTreeSet;

use num_traits::One;
use serde::Serialize;

use super::reduce::exact_quotient;
use super::{SymError, Symbol};
use crate::Expr;

/// A pivot that is a nonzero expression but not a constant: the system
/// was solved at generic rank and degenerates where the pivot vanishes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenericRankWarning {
    pub unknown: Symbol,
    pub pivot: Expr,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct LinearSolution {
    /// Solved unknowns in declaration order. Right-hand sides contain no
    /// solved unknown; they may contain unsolved ones.
    pub solved: Vec<(Symbol, Expr)>,
    pub unsolved: Vec<Symbol>,
    /// Equations left with no unknowns after elimination.
    pub relations: Vec<Expr>,
    pub warnings: Vec<GenericRankWarning>,
}

impl LinearSolution {
    pub fn value(&self, s: &Symbol) -> Option<&Expr> {
        self.solved.iter().find(|(k, _)| k == s).map(|(_, v)| v)
    }
}

struct Row {
    coeffs: Vec<Expr>,
    rest: Expr,
}

impl Row {
    fn combine(&self, a: &Expr, other: &Row, b: &Expr) -> Row {
        // a·self − b·other
        Row {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| a * x - b * y).collect(),
            rest: a * &self.rest - b * &other.rest,
        }
    }

    fn scale(&mut self, c: &Expr) {
        for x in &mut self.coeffs {
            *x = &*x * c;
        }
        self.rest = &self.rest * c;
    }
}

/// Gaussian elimination over polynomial coefficients with deterministic
/// pivoting: unknowns in declaration order, and for each unknown the first
/// remaining equation whose coefficient is a nonzero expression.
pub fn solve_linear_symbolic(equations: &[Expr], unknowns: &[Symbol]) -> Result<LinearSolution, SymError> {
    let set: BTreeSet<Symbol> = unknowns.iter().cloned().collect();
    let mut rows = Vec::with_capacity(equations.len());
    for eq in equations {
        if eq.degree_in_set(&set) > 1 {
            return Err(SymError::NotAffine(eq.to_string()));
        }
        let mut rest = eq.clone();
        let coeffs = unknowns
            .iter()
            .map(|u| {
                let parts = rest.collect(u);
                let c = parts.get(1).cloned().unwrap_or_else(Expr::zero);
                rest = parts[0].clone();
                c
            })
            .collect();
        rows.push(Row { coeffs, rest });
    }

    let mut pivot_of_row: Vec<Option<usize>> = vec![None; rows.len()];
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut warnings = Vec::new();
    let mut unsolved = Vec::new();
    for (j, u) in unknowns.iter().enumerate() {
        let Some(i) = (0..rows.len()).find(|&i| pivot_of_row[i].is_none() && !rows[i].coeffs[j].is_zero()) else {
            unsolved.push(u.clone());
            continue;
        };
        let piv = rows[i].coeffs[j].clone();
        let constant = piv.constant_value();
        match &constant {
            Some(c) => rows[i].scale(&Expr::constant(c.recip())),
            None => warnings.push(GenericRankWarning { unknown: u.clone(), pivot: piv.clone() }),
        }
        pivot_of_row[i] = Some(j);
        pivots.push((j, i));
        let pivot_row = Row { coeffs: rows[i].coeffs.clone(), rest: rows[i].rest.clone() };
        let lead = pivot_row.coeffs[j].clone();
        for (k, row) in rows.iter_mut().enumerate() {
            if k == i || row.coeffs[j].is_zero() {
                continue;
            }
            let ck = row.coeffs[j].clone();
            *row = if constant.is_some() {
                row.combine(&Expr::one(), &pivot_row, &ck)
            } else {
                row.combine(&lead, &pivot_row, &ck)
            };
        }
    }

    let mut solved = Vec::new();
    for &(j, i) in &pivots {
        let row = &rows[i];
        let mut rhs = -&row.rest;
        for (f, c) in row.coeffs.iter().enumerate() {
            if f != j && !c.is_zero() {
                rhs = rhs - c * &Expr::symbol(unknowns[f].clone());
            }
        }
        let piv = &row.coeffs[j];
        let value = if piv.is_one() {
            rhs
        } else if let Some(c) = piv.constant_value() {
            rhs.scale(&c.recip())
        } else {
            exact_quotient(&rhs, piv).ok_or_else(|| SymError::NonPolynomialSolution {
                unknown: unknowns[j].to_string(),
                pivot: piv.to_string(),
            })?
        };
        solved.push((j, unknowns[j].clone(), value));
    }
    solved.sort_by_key(|(j, _, _)| *j);

    let relations = rows
        .iter()
        .zip(&pivot_of_row)
        .filter(|(r, p)| p.is_none() && !r.rest.is_zero())
        .map(|(r, _)| r.rest.clone())
        .collect();

    Ok(LinearSolution { solved: solved.into_iter().map(|(_, s, v)| (s, v)).collect(), unsolved, relations, warnings })
}
