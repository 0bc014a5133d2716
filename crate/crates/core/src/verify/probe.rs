use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::numeric::{CompiledExpr, NumericState, NumericSystem};
use crate::engine::{ConstraintChain, HamiltonianSet};
use crate::symcore::{Symbol, SymbolKind};
use crate::Expr;

pub const PROBE_TOLERANCE: f64 = 1e-10;
pub const REJECTION_TOLERANCE: f64 = 1e-9;

/// Moves a point onto the chain's surface by least-norm linear solves.
///
/// When every constraint is affine in the canonical momenta one solve for
/// the momenta is exact. Otherwise the solve runs over all variables, is
/// repeated a few times, and points that still miss the surface by more
/// than [`REJECTION_TOLERANCE`] are rejected.
pub struct SurfaceProjector {
    constraints: Vec<CompiledExpr<f64>>,
    /// `jacobian[k][j] = ∂C_k/∂unknowns[j]`
    jacobian: Vec<Vec<CompiledExpr<f64>>>,
    unknowns: Vec<usize>,
    pub degraded: bool,
}

impl SurfaceProjector {
    pub fn new(system: &NumericSystem<f64>, chain: &ConstraintChain) -> Self {
        let prepared: Vec<Expr> = chain.expressions().iter().map(|c| system.prepare(c)).collect();
        let layout = system.layout();
        let momenta: Vec<Symbol> =
            system.state_symbols.iter().filter(|s| s.kind() == SymbolKind::Momentum).cloned().collect();
        let mset: BTreeSet<Symbol> = momenta.iter().cloned().collect();
        // affine in momenta, and no momentum-free constraint left standing
        let explicit = prepared
            .iter()
            .all(|c| c.degree_in_set(&mset) <= 1 && (c.is_zero() || c.symbols().iter().any(|s| mset.contains(s))));
        let unknown_symbols: Vec<Symbol> = if explicit {
            momenta
        } else {
            layout.symbols().iter().filter(|s| s.kind() != SymbolKind::Time).cloned().collect()
        };
        let compile = |e: &Expr| CompiledExpr::compile(e, layout).expect("constraint over the numeric layout");
        SurfaceProjector {
            constraints: prepared.iter().map(compile).collect(),
            jacobian: prepared.iter().map(|c| unknown_symbols.iter().map(|u| compile(&c.diff(u))).collect()).collect(),
            unknowns: unknown_symbols.iter().map(|u| layout.position(u).unwrap()).collect(),
            degraded: !explicit,
        }
    }

    pub fn residual(&self, env: &[f64]) -> f64 {
        self.constraints.iter().map(|c| c.eval(env).abs()).fold(0.0, f64::max)
    }

    fn solve_once(&self, env: &mut [f64]) {
        let m = self.constraints.len();
        let n = self.unknowns.len();
        if m == 0 || n == 0 {
            return;
        }
        let rows: Vec<usize> = (0..m).filter(|&k| self.jacobian[k].iter().any(|d| d.eval(env) != 0.0)).collect();
        if rows.is_empty() {
            return;
        }
        let j = DMatrix::from_fn(rows.len(), n, |r, c| self.jacobian[rows[r]][c].eval(env));
        let r = DVector::from_fn(rows.len(), |k, _| self.constraints[rows[k]].eval(env));
        // least-norm step J^T (J J^T)^-1 r, pseudo-inverse if J J^T is singular
        let delta = match (&j * j.transpose()).cholesky() {
            Some(ch) => j.transpose() * ch.solve(&r),
            None => match j.pseudo_inverse(1e-12) {
                Ok(pinv) => pinv * r,
                Err(_) => return,
            },
        };
        for (k, &i) in self.unknowns.iter().enumerate() {
            env[i] -= delta[k];
        }
    }

    /// Projects in place; `false` if the point had to be rejected.
    pub fn project(&self, env: &mut [f64]) -> bool {
        let rounds = if self.degraded { 25 } else { 2 };
        for _ in 0..rounds {
            self.solve_once(env);
            if self.residual(env) <= 1e-13 {
                break;
            }
        }
        self.residual(env) <= REJECTION_TOLERANCE
    }
}

fn uniform(rng: &mut ChaCha8Rng, amplitude: f64) -> f64 {
    rng.gen_range(-amplitude..=amplitude)
}

/// Random point on the surface: state, parameter values and `t = 0`.
pub fn random_surface_point(
    system: &NumericSystem<f64>,
    projector: &SurfaceProjector,
    rng: &mut ChaCha8Rng,
    amplitude: f64,
    max_attempts: usize,
) -> Option<Vec<f64>> {
    let n = system.layout().len();
    for _ in 0..max_attempts.max(1) {
        let mut env: Vec<f64> = (0..n).map(|_| uniform(rng, amplitude)).collect();
        env[n - 1] = 0.0;
        if projector.project(&mut env) {
            return Some(env);
        }
    }
    None
}

/// Canonical initial data on the chain's surface with every parameter at 0.
pub fn on_surface_state<F: Float>(
    system: &NumericSystem<f64>,
    chain: &ConstraintChain,
    seed: u64,
    amplitude: f64,
) -> Option<NumericState<F>> {
    let projector = SurfaceProjector::new(system, chain);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = system.state_symbols.len();
    let total = system.layout().len();
    for _ in 0..100 {
        let mut env: Vec<f64> = (0..total).map(|k| if k < n { uniform(&mut rng, amplitude) } else { 0.0 }).collect();
        if projector.project(&mut env) && env[n..total - 1].iter().all(|v| v.abs() <= REJECTION_TOLERANCE) {
            return Some(NumericState {
                symbols: system.state_symbols.clone(),
                values: env[..n].iter().map(|v| F::from(*v).unwrap()).collect(),
            });
        }
    }
    None
}

/// Initial data on the homogeneous Gauss surface: random `A[i,c]` and
/// `pi[i,c] = λ_i A[i,c]`, so each `ε_{abc} A_i^b π_i^c` cancels exactly.
pub fn gauss_surface_state<F: Float>(system: &NumericSystem<f64>, seed: u64, amplitude: f64) -> NumericState<F> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lambda: Vec<f64> = (0..3).map(|_| uniform(&mut rng, 1.0)).collect();
    let mut state =
        NumericState::<f64> { symbols: system.state_symbols.clone(), values: vec![0.0; system.state_symbols.len()] };
    for s in &system.state_symbols {
        if s.kind() == SymbolKind::Coordinate && s.name() == "A" && s.indices().len() == 2 {
            let a = uniform(&mut rng, amplitude);
            let i = s.indices()[0] as usize;
            state.set(s, a);
            state.set(&s.momentum(), lambda[(i - 1) % 3] * a);
        }
    }
    NumericState { symbols: state.symbols, values: state.values.iter().map(|v| F::from(*v).unwrap()).collect() }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub seed: u64,
    pub requested: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub degraded: bool,
    pub max_residual: f64,
    /// Constraint and direction of the largest residual.
    pub worst: Option<String>,
}

/// Evaluates `{H′_α, C}` at random on-surface points. Directions whose rate
/// the chain fixed are folded into the time direction.
pub fn integrability_probe(
    hset: &HamiltonianSet,
    chain: &ConstraintChain,
    system: &NumericSystem<f64>,
    samples: usize,
    seed: u64,
) -> ProbeReport {
    let params = hset.parameters();
    let mut checks: Vec<(String, CompiledExpr<f64>)> = Vec::new();
    for c in &chain.constraints {
        let mut along_time = hset.bracket(&hset.generators[0].expr, &c.expression);
        for (k, g) in hset.generators.iter().enumerate().skip(1) {
            let b = hset.bracket(&g.expr, &c.expression);
            match chain.parameter_relations.iter().find(|r| r.parameter == params[k]) {
                Some(rel) => along_time = along_time + &rel.rate * &b,
                None => checks.push((format!("{{H'[{}], {}}}", params[k], c.expression), system.compile(&b).unwrap())),
            }
        }
        checks.push((format!("{{H'[t], {}}}", c.expression), system.compile(&along_time).unwrap()));
    }

    let projector = SurfaceProjector::new(system, chain);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ProbeReport {
        seed,
        requested: samples,
        accepted: 0,
        rejected: 0,
        degraded: projector.degraded,
        max_residual: 0.0,
        worst: None,
    };
    let mut attempts = 0;
    while report.accepted < samples && attempts < samples.max(1) * 100 {
        attempts += 1;
        let Some(env) = random_surface_point(system, &projector, &mut rng, 1.0, 1) else {
            report.rejected += 1;
            continue;
        };
        report.accepted += 1;
        for (name, check) in &checks {
            let v = check.eval(&env).abs();
            if v > report.max_residual || v.is_nan() {
                report.max_residual = v;
                report.worst = Some(name.clone());
            }
        }
    }
    report
}
