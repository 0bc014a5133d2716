use std::collections::BTreeMap;

use super::*;
use crate::engine::{build_h0, build_hjpde, classify, derive_flow, legendre, run_chain, DEFAULT_MAX_GENERATIONS};
use crate::frontend::{builtin_model, expand_indices, FlatModel};
use crate::Rational;

struct Run {
    model: FlatModel,
    hset: HamiltonianSet,
    chain: ConstraintChain,
    act: CanonicalAction,
    flow: TotalDifferentialSystem,
}

fn run(name: &str) -> Run {
    let model = expand_indices(&builtin_model(name, &BTreeMap::new()).unwrap()).unwrap();
    let leg = legendre(&model).unwrap();
    let hset = build_hjpde(&leg, &build_h0(&leg, &model).unwrap());
    let chain = classify(&run_chain(&hset, DEFAULT_MAX_GENERATIONS), &hset);
    let flow = derive_flow(&hset);
    let act = canonical_action(&hset, &flow);
    Run { model, hset, chain, act, flow }
}

fn sym(name: &str) -> Expr {
    Expr::symbol(Symbol::coordinate(name))
}
fn mom(name: &str) -> Expr {
    Expr::symbol(Symbol::coordinate(name).momentum())
}
fn half() -> Expr {
    Expr::constant(Rational::new(1.into(), 2.into()))
}

#[test]
fn free_particle_action_and_report() {
    let r = run("free-particle");
    assert_eq!(r.act.time_integrand(), &(half() * mom("q").pow(2)));
    let rep = path_integral_report(&r.act, &r.chain, &r.hset);
    assert_eq!(rep.variables, vec![(Symbol::coordinate("q"), Symbol::coordinate("q").momentum())]);
    assert_eq!(rep.externals, vec![Symbol::time()]);
    assert_eq!(rep.status, Integrability::Integrable);
    assert_eq!(faddeev_measure(&r.chain, &[], &r.hset.extended_signature()), Err(MeasureError::NoConstraints));
}

#[test]
fn toy_action_integrand() {
    let r = run("toy-singular");
    assert_eq!(r.act.time_integrand(), &(half() * mom("q1").pow(2)));
    // along q2: H′ = p2 so H = 0 and no canonical momentum enters
    assert_eq!(r.act.along(&Symbol::coordinate("q2")), Some(&Expr::zero()));
    let rep = path_integral_report(&r.act, &r.chain, &r.hset);
    assert_eq!(rep.variables, vec![(Symbol::coordinate("q1"), Symbol::coordinate("q1").momentum())]);
    assert_eq!(rep.externals, vec![Symbol::time(), Symbol::coordinate("q2")]);
    assert_eq!((rep.gauge_conditions, rep.delta_factors.len(), rep.determinants.len()), (0, 0, 0));
}

#[test]
fn action_agrees_with_flow_tables() {
    for name in ["free-particle", "toy-singular", "yang-mills-su2-homogeneous"] {
        let r = run(name);
        let t = Symbol::time();
        let mut expected = -r.hset.h0.clone();
        for (q, p) in r.hset.signature.pairs() {
            expected = expected + Expr::symbol(p.clone()) * r.flow.coefficient(q, &t).unwrap();
        }
        assert_eq!(r.act.time_integrand(), &expected, "{name}");
    }
}

#[test]
fn report_partitions_configuration_symbols() {
    for name in ["free-particle", "toy-singular", "yang-mills-su2-homogeneous"] {
        let r = run(name);
        let rep = path_integral_report(&r.act, &r.chain, &r.hset);
        let mut seen: Vec<Symbol> = rep.variables.iter().map(|(q, _)| q.clone()).collect();
        seen.extend(rep.externals.iter().filter(|s| **s != Symbol::time()).cloned());
        seen.sort();
        assert_eq!(seen, r.model.coordinates, "{name}");
        for (q, _) in &rep.variables {
            assert!(!rep.externals.contains(q));
        }
    }
}

#[test]
fn toy_faddeev_measure() {
    let r = run("toy-singular");
    let sig = r.hset.extended_signature();
    let m = faddeev_measure(&r.chain, &[sym("q2"), sym("q1")], &sig).unwrap();
    assert_eq!(m.matrix, vec![vec![-Expr::one(), Expr::zero()], vec![Expr::zero(), -Expr::one()]]);
    assert_eq!(m.determinant, Expr::one());
    assert_eq!(m.delta_factors.len(), 4);

    let err = faddeev_measure(&r.chain, &[mom("q2"), mom("q1")], &sig).unwrap_err();
    assert!(matches!(err, MeasureError::Inadmissible { .. }));
    assert!(err.is_gauge_problem());
    let err = faddeev_measure(&r.chain, &[sym("q2")], &sig).unwrap_err();
    assert_eq!(err, MeasureError::CountMismatch { constraints: 2, gauges: 1 });
}

#[test]
fn yang_mills_axial_block() {
    let r = run("yang-mills-su2-homogeneous");
    let sig = r.hset.extended_signature();
    let a0 = |c: u32| Expr::symbol(Symbol::indexed("A0", &[c]));
    let a = |i: u32, c: u32| Expr::symbol(Symbol::indexed("A", &[i, c]));
    let mut gauges: Vec<Expr> = (1..=3).map(a0).collect();
    gauges.extend([a(1, 2) - a(2, 1), a(2, 3) - a(3, 2), a(3, 1) - a(1, 3)]);
    let m = faddeev_measure(&r.chain, &gauges, &sig).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let expected = if i == j { -Expr::one() } else { Expr::zero() };
            assert_eq!(m.matrix[i][j], expected);
        }
    }
    assert!(!m.determinant.is_zero());
}

#[test]
fn second_class_refusal() {
    let mut p = BTreeMap::new();
    p.insert("m".to_string(), Rational::from_integer(1.into()));
    let model = expand_indices(&builtin_model("proca-homogeneous", &p).unwrap()).unwrap();
    let leg = legendre(&model).unwrap();
    let hset = build_hjpde(&leg, &build_h0(&leg, &model).unwrap());
    let chain = classify(&run_chain(&hset, DEFAULT_MAX_GENERATIONS), &hset);
    let err = faddeev_measure(&chain, &[sym("A0"), sym("A0")], &hset.extended_signature()).unwrap_err();
    assert!(matches!(err, MeasureError::SecondClass { .. }));
    assert!(!err.is_gauge_problem());
}

#[test]
fn cofactor_rows_agree() {
    let m: Vec<Vec<Expr>> = (0..4)
        .map(|i| {
            (0..4)
                .map(|j| {
                    sym("q") * Expr::constant(Rational::from_integer(((i * 7 + j * 3) % 5).into()))
                        + Expr::constant(Rational::from_integer(((i + j) % 3).into()))
                })
                .collect()
        })
        .collect();
    let d0 = determinant(&m, 0);
    for row in 1..4 {
        assert_eq!(determinant(&m, row), d0);
    }
}
