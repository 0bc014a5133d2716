use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::engine::{ConstraintChain, DEFAULT_MAX_GENERATIONS};
use crate::frontend::{builtin_model, expand_indices};
use crate::pipeline::{analyze, initial_state, Analysis};
use crate::symcore::Symbol;
use crate::{Expr, Rational};

fn analysis(name: &str, params: &[(&str, i64)]) -> Analysis {
    let p: BTreeMap<String, Rational> =
        params.iter().map(|(k, v)| (k.to_string(), Rational::from_integer((*v).into()))).collect();
    analyze(expand_indices(&builtin_model(name, &p).unwrap()).unwrap(), DEFAULT_MAX_GENERATIONS).unwrap()
}

fn no_overrides() -> BTreeMap<Symbol, Rational> {
    BTreeMap::new()
}

#[test]
fn free_particle_exact_linear_flow() {
    let a = analysis("free-particle", &[]);
    let sys: NumericSystem<f64> = a.numeric_system(&no_overrides());
    let paths = sys.compile_paths(&[]).unwrap();
    let mut init = sys.zero_state();
    init.set(&Symbol::coordinate("q").momentum(), 1.0);
    let traj = integrate_flow(&sys, &init, &paths, 0.01, 1.0);
    assert_eq!(traj.len(), 101);
    assert!((traj.last().get(&Symbol::coordinate("q")).unwrap() - 1.0).abs() <= 1e-12);
    let rep = constraint_drift(&traj, &a.chain, &sys, &paths);
    assert!(rep.constraints.is_empty());
    assert!(rep.energy_drift <= 1e-12);
}

#[test]
fn single_precision_integration() {
    let a = analysis("free-particle", &[]);
    let sys: NumericSystem<f32> = NumericSystem::new(&a.hamiltonians, &a.flow, &BTreeMap::new());
    let paths = sys.compile_paths(&[]).unwrap();
    let mut init = sys.zero_state();
    init.set(&Symbol::coordinate("q").momentum(), 1.0f32);
    let traj = integrate_flow(&sys, &init, &paths, 0.125, 1.0);
    assert!((traj.last().get(&Symbol::coordinate("q")).unwrap() - 1.0).abs() <= 1e-6);
}

#[test]
fn toy_on_surface_is_stationary() {
    let a = analysis("toy-singular", &[]);
    let sys = a.numeric_system(&no_overrides());
    let paths = sys.compile_paths(&[]).unwrap();
    let mut init = sys.zero_state();
    init.set(&Symbol::coordinate("q1"), 0.3);
    let traj = integrate_flow(&sys, &init, &paths, 0.01, 1.0);
    assert_eq!(traj.last(), init);
    let probe = integrability_probe(&a.hamiltonians, &a.chain, &sys, 20, 1);
    assert_eq!(probe.max_residual, 0.0);
    assert!(!probe.degraded);
}

#[test]
fn nonfinite_state_aborts() {
    let a = analysis("free-particle", &[]);
    let sys: NumericSystem<f64> = a.numeric_system(&no_overrides());
    let paths = sys.compile_paths(&[]).unwrap();
    let mut init = sys.zero_state();
    init.set(&Symbol::coordinate("q").momentum(), f64::INFINITY);
    let traj = integrate_flow(&sys, &init, &paths, 0.1, 1.0);
    assert!(traj.aborted.is_some());
    assert_eq!(traj.len(), 1);
}

#[test]
fn compiled_flow_matches_direct_evaluation() {
    let a = analysis("yang-mills-su2-homogeneous", &[("g", 1)]);
    let sys = a.numeric_system(&no_overrides());
    let layout = sys.layout().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let env: Vec<f64> = (0..layout.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for row in &a.flow.rows {
            if !sys.state_symbols.contains(&row.variable) {
                continue;
            }
            for c in &row.coefficients {
                let compiled = sys.compile(c).unwrap().eval(&env);
                let direct = sys.prepare(c).eval(to_float::<f64>, |s| env[layout.position(s).unwrap()]);
                assert!((compiled - direct).abs() <= 1e-14 * direct.abs().max(1.0));
            }
        }
    }
}

#[test]
fn gauss_surface_helper_zeroes_gauss_law() {
    let a = analysis("yang-mills-su2-homogeneous", &[]);
    let sys = a.numeric_system(&no_overrides());
    let init: NumericState<f64> = gauss_surface_state(&sys, 3, 1.0);
    let mut env = init.values.clone();
    env.extend([0.0; 4]);
    for c in &a.chain.constraints {
        assert!(sys.compile(&c.expression).unwrap().eval(&env).abs() <= 1e-15);
    }
    assert!(init.values.iter().any(|v| *v != 0.0));
}

#[test]
fn yang_mills_probe_closed_and_truncated() {
    let a = analysis("yang-mills-su2-homogeneous", &[]);
    let sys = a.numeric_system(&no_overrides());
    let probe = integrability_probe(&a.hamiltonians, &a.chain, &sys, 100, 5);
    assert_eq!(probe.accepted, 100);
    assert!(!probe.degraded);
    assert!(probe.max_residual <= PROBE_TOLERANCE, "{probe:?}");

    let truncated = ConstraintChain::primary(&a.hamiltonians);
    let probe = integrability_probe(&a.hamiltonians, &truncated, &sys, 20, 5);
    assert!(probe.max_residual > 1e-3, "{probe:?}");
}

#[test]
fn proca_probe_runs_degraded() {
    let a = analysis("proca-homogeneous", &[("m", 1)]);
    let sys = a.numeric_system(&no_overrides());
    let probe = integrability_probe(&a.hamiltonians, &a.chain, &sys, 20, 2);
    assert!(probe.degraded);
    assert_eq!(probe.accepted, 20);
    assert!(probe.max_residual <= PROBE_TOLERANCE, "{probe:?}");
}

#[test]
fn oracle_chains() {
    let toy = analysis("toy-singular", &[]);
    let oracle = dirac_oracle(&toy.model).unwrap();
    let p = |n: &str| Expr::symbol(Symbol::coordinate(n).momentum());
    // {φ, H_T} rather than {H′, φ}: the secondary comes out as −p1
    assert_eq!(oracle.expressions(), vec![p("q2"), -p("q1")]);
    assert_eq!(oracle.generations, 2);
    assert!(oracle.is_closed());

    let free = analysis("free-particle", &[]);
    assert!(dirac_oracle(&free.model).unwrap().constraints.is_empty());

    let ym = analysis("yang-mills-su2-homogeneous", &[]);
    let oracle = dirac_oracle(&ym.model).unwrap();
    assert_eq!(oracle.constraints.len(), 6);
    assert!(oracle.constraints.iter().all(|c| c.class == crate::engine::ConstraintClass::First));

    for a in [toy, free, ym, analysis("proca-homogeneous", &[("m", 2)])] {
        let oracle = dirac_oracle(&a.model).unwrap();
        let cmp = compare_chains(&a.chain.expressions(), &oracle.expressions());
        assert_eq!(cmp.verdict, Verdict::Equivalent, "{}: {cmp:?}", a.model.name);
    }
}

#[test]
fn chain_comparison_examples() {
    let p = |n: &str| Expr::symbol(Symbol::coordinate(n).momentum());
    let cmp = compare_chains(&[p("q1"), p("q2")], &[p("q1") + p("q2"), p("q1") - p("q2")]);
    assert_eq!(cmp.verdict, Verdict::Equivalent);
    let cmp = compare_chains(&[p("q1")], &[p("q1"), p("q2")]);
    assert_eq!(cmp.verdict, Verdict::NotEquivalent);
    assert_eq!(cmp.unmatched_right, vec![p("q2")]);
}

#[test]
fn paths_default_and_validate() {
    let a = analysis("yang-mills-su2-homogeneous", &[]);
    let sys = a.numeric_system(&no_overrides());
    let paths = sys.compile_paths(&[]).unwrap();
    assert_eq!(paths.paths.len(), 3);
    let bad = ParameterPath { parameter: Symbol::coordinate("q"), path: Expr::zero() };
    assert!(sys.compile_paths(&[bad]).is_err());
}

#[test]
fn yang_mills_drift_and_order() {
    let a = analysis("yang-mills-su2-homogeneous", &[("g", 1)]);
    let sys = a.numeric_system(&no_overrides());
    let paths = sys.compile_paths(&[]).unwrap();
    let init = initial_state(&a, &sys, 7, 1.0).unwrap();
    let rep = drift_with_halving(&sys, &a.chain, &init, &paths, 1e-3, 10.0);
    assert!(rep.max_constraint <= DRIFT_TOLERANCE, "{rep:?}");
    assert!(rep.energy_relative && rep.energy_drift <= DRIFT_TOLERANCE, "{rep:?}");
    let ratio = rep.halving.unwrap().ratio;
    assert!((12.0..=20.0).contains(&ratio), "{ratio}");
}
