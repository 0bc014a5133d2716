use serde::Serialize;

use super::HamiltonianSet;
use crate::symcore::{solve_linear_symbolic, SurfaceReducer, Symbol, SymbolKind};
use crate::Expr;

pub const DEFAULT_MAX_GENERATIONS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintClass {
    First,
    Second,
    Unresolved,
}

/// Where a constraint (or a dependent candidate) came from.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// Primary constraint `H′_μ` attached to this parameter.
    Primary { parameter: Symbol },
    /// `{H′_α, C}` for chain member `constraint`, along parameter `along`.
    Variation { constraint: usize, along: Symbol },
    /// Left over after solving the variations of these chain members for the
    /// rates of the non-time parameters.
    ParameterConsistency { constraints: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Constraint {
    pub expression: Expr,
    pub generation: usize,
    pub provenance: Provenance,
    pub class: ConstraintClass,
}

/// A nonzero candidate that reduced to zero modulo the chain:
/// `expression = Σ coefficient·chain[index]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DependencyCertificate {
    pub expression: Expr,
    pub provenance: Provenance,
    pub coefficients: Vec<(usize, Expr)>,
}

/// A non-time parameter whose rate `dt_μ/dt` is fixed by consistency.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParameterRelation {
    pub parameter: Symbol,
    pub rate: Expr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Closure {
    Closed,
    Open,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintChain {
    pub constraints: Vec<Constraint>,
    pub generations: usize,
    pub closure: Closure,
    pub certificates: Vec<DependencyCertificate>,
    pub parameter_relations: Vec<ParameterRelation>,
    /// `{C_i, C_j}` for all chain members, filled in by [`classify`].
    pub bracket_matrix: Vec<Vec<Expr>>,
    pub warnings: Vec<String>,
}

impl ConstraintChain {
    pub fn empty() -> Self {
        ConstraintChain {
            constraints: Vec::new(),
            generations: 0,
            closure: Closure::Closed,
            certificates: Vec::new(),
            parameter_relations: Vec::new(),
            bracket_matrix: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// Chain holding the primary constraints only.
    pub fn primary(hset: &HamiltonianSet) -> Self {
        let mut chain = Self::empty();
        for g in hset.generators.iter().skip(1) {
            chain.constraints.push(Constraint {
                expression: g.expr.clone(),
                generation: 0,
                provenance: Provenance::Primary { parameter: g.parameter.clone() },
                class: ConstraintClass::Unresolved,
            });
        }
        chain.generations = usize::from(!chain.constraints.is_empty());
        chain
    }

    pub fn expressions(&self) -> Vec<Expr> {
        self.constraints.iter().map(|c| c.expression.clone()).collect()
    }

    pub fn generation(&self, k: usize) -> Vec<&Expr> {
        self.constraints.iter().filter(|c| c.generation == k).map(|c| &c.expression).collect()
    }

    pub fn is_closed(&self) -> bool {
        self.closure == Closure::Closed
    }

    pub fn reducer(&self) -> SurfaceReducer<crate::Rational> {
        SurfaceReducer::new(&self.expressions())
    }

    pub fn first_class_count(&self) -> usize {
        self.constraints.iter().filter(|c| c.class == ConstraintClass::First).count()
    }

    pub fn second_class(&self) -> Vec<usize> {
        (0..self.constraints.len()).filter(|&i| self.constraints[i].class == ConstraintClass::Second).collect()
    }
}

/// Candidates produced by one round of variations.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct IntegrabilityStep {
    /// Unreduced candidates whose remainder modulo the chain is nonzero.
    pub candidates: Vec<(Expr, Provenance)>,
    pub dependent: Vec<DependencyCertificate>,
    pub parameter_relations: Vec<ParameterRelation>,
    pub warnings: Vec<String>,
}

impl IntegrabilityStep {
    pub fn expressions(&self) -> Vec<Expr> {
        self.candidates.iter().map(|(e, _)| e.clone()).collect()
    }
}

/// Varies every known constraint along every generator.
pub fn integrability_step(hset: &HamiltonianSet, known: &ConstraintChain) -> IntegrabilityStep {
    let all: Vec<usize> = (0..known.constraints.len()).collect();
    step(hset, known, &all)
}

fn rate_symbol(parameter: &Symbol) -> Symbol {
    Symbol::new(SymbolKind::Parameter, format!("rate_{}", parameter.name()), parameter.indices().to_vec())
}

fn certificate_of(coefficients: Vec<Expr>) -> Vec<(usize, Expr)> {
    coefficients.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect()
}

/// `dC = Σ_α {H′_α, C} dt_α` must vanish with `dt_α` independent. If only
/// the time direction survives reduction, it is a new candidate. Otherwise
/// the variations are solved for the parameter rates and any relation left
/// over becomes a candidate. Certificates are recorded for `frontier` only.
fn step(hset: &HamiltonianSet, chain: &ConstraintChain, frontier: &[usize]) -> IntegrabilityStep {
    let reducer = chain.reducer();
    let mut out = IntegrabilityStep::default();
    let params = hset.parameters();
    let rates: Vec<Symbol> = params.iter().skip(1).map(rate_symbol).collect();
    let mut equations = Vec::new();
    let mut eq_sources = Vec::new();

    for (i, c) in chain.constraints.iter().enumerate() {
        let record = frontier.contains(&i);
        let variations: Vec<Expr> = hset.generators.iter().map(|g| hset.bracket(&g.expr, &c.expression)).collect();
        let reduced: Vec<_> = variations.iter().map(|v| reducer.reduce(v)).collect();
        let along_parameters = reduced.iter().skip(1).any(|r| !r.remainder.is_zero());
        if along_parameters {
            let mut eq = reduced[0].remainder.clone();
            for (r, u) in reduced.iter().skip(1).zip(&rates) {
                eq = eq + &r.remainder * &Expr::symbol(u.clone());
            }
            equations.push(eq);
            eq_sources.push(i);
            continue;
        }
        if !record {
            continue;
        }
        let provenance = Provenance::Variation { constraint: i, along: params[0].clone() };
        if !reduced[0].remainder.is_zero() {
            out.candidates.push((variations[0].clone(), provenance));
        } else if !variations[0].is_zero() {
            out.dependent.push(DependencyCertificate {
                expression: variations[0].clone(),
                provenance,
                coefficients: certificate_of(reduced[0].certificate.clone()),
            });
        }
    }

    if !equations.is_empty() {
        match solve_linear_symbolic(&equations, &rates) {
            Ok(sol) => {
                for (u, value) in &sol.solved {
                    if sol.unsolved.iter().any(|s| value.contains(s)) {
                        continue;
                    }
                    let k = rates.iter().position(|r| r == u).unwrap();
                    out.parameter_relations
                        .push(ParameterRelation { parameter: params[k + 1].clone(), rate: value.clone() });
                }
                for w in &sol.warnings {
                    out.warnings.push(format!("rate of {} solved at generic rank (pivot `{}`)", w.unknown, w.pivot));
                }
                for rel in sol.relations {
                    if !reducer.reduces_to_zero(&rel) {
                        out.candidates
                            .push((rel, Provenance::ParameterConsistency { constraints: eq_sources.clone() }));
                    }
                }
            }
            Err(e) => {
                // fall back to requiring every direction separately
                out.warnings
                    .push(format!("parameter rates not solvable ({e}); treating each direction as a constraint"));
                for eq in equations {
                    for part in split_linear(&eq, &rates) {
                        if !reducer.reduces_to_zero(&part) {
                            out.candidates
                                .push((part, Provenance::ParameterConsistency { constraints: eq_sources.clone() }));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Constant part and the coefficient of each unknown of an affine form.
fn split_linear(eq: &Expr, unknowns: &[Symbol]) -> Vec<Expr> {
    let mut rest = eq.clone();
    let mut parts = Vec::new();
    for u in unknowns {
        let mut c = rest.collect(u);
        if c.len() > 1 {
            parts.push(c.swap_remove(1));
        }
        rest = c.swap_remove(0);
    }
    parts.push(rest);
    parts
}

/// Iterates variations until no candidate survives reduction, or until
/// `max_generations` generations exist and more would be needed.
pub fn run_chain(hset: &HamiltonianSet, max_generations: usize) -> ConstraintChain {
    let max_generations = max_generations.max(1);
    let mut chain = ConstraintChain::primary(hset);
    let mut frontier: Vec<usize> = (0..chain.constraints.len()).collect();
    while !frontier.is_empty() {
        let st = step(hset, &chain, &frontier);
        chain.certificates.extend(st.dependent);
        chain.parameter_relations = st.parameter_relations;
        chain.warnings.extend(st.warnings);

        // accept candidates one at a time so a generation stays irredundant
        let start = chain.constraints.len();
        let mut accepted: Vec<Constraint> = Vec::new();
        for (expr, provenance) in st.candidates {
            let mut current = chain.expressions();
            current.extend(accepted.iter().map(|c| c.expression.clone()));
            let red = SurfaceReducer::new(&current).reduce(&expr);
            if red.remainder.is_zero() {
                chain.certificates.push(DependencyCertificate {
                    expression: expr,
                    provenance,
                    coefficients: certificate_of(red.certificate),
                });
            } else {
                accepted.push(Constraint {
                    expression: expr,
                    generation: chain.generations,
                    provenance,
                    class: ConstraintClass::Unresolved,
                });
            }
        }
        if accepted.is_empty() {
            break;
        }
        if chain.generations >= max_generations {
            chain.closure = Closure::Open;
            chain.warnings.push(format!("chain still growing after {max_generations} generations; reported open"));
            return chain;
        }
        chain.constraints.extend(accepted);
        chain.generations += 1;
        frontier = (start..chain.constraints.len()).collect();
    }
    chain.closure = Closure::Closed;
    chain
}

/// Labels each constraint first-class iff its bracket with every chain
/// member vanishes on the surface; keeps the bracket matrix.
pub fn classify(chain: &ConstraintChain, hset: &HamiltonianSet) -> ConstraintChain {
    let mut out = chain.clone();
    let reducer = chain.reducer();
    let exprs = chain.expressions();
    let n = exprs.len();
    let matrix: Vec<Vec<Expr>> = (0..n).map(|i| (0..n).map(|j| hset.bracket(&exprs[i], &exprs[j])).collect()).collect();
    for i in 0..n {
        out.constraints[i].class = if !chain.is_closed() {
            ConstraintClass::Unresolved
        } else if matrix[i].iter().all(|b| reducer.reduces_to_zero(b)) {
            ConstraintClass::First
        } else {
            ConstraintClass::Second
        };
    }
    out.bracket_matrix = matrix;
    out
}

/// Residuals of `{H′_α, H′_β}` modulo the chain; empty iff the system is
/// integrable on the surface.
pub fn involution_residuals(hset: &HamiltonianSet, chain: &ConstraintChain) -> Vec<(usize, usize, Expr)> {
    let reducer = chain.reducer();
    super::generator_brackets(hset)
        .into_iter()
        .filter_map(|(a, b, v)| {
            let r = reducer.reduce(&v).remainder;
            (!r.is_zero()).then_some((a, b, r))
        })
        .collect()
}
