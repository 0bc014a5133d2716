use std::collections::BTreeMap;

use super::*;
use crate::frontend::{builtin_model, expand_indices, parse_model, FlatModel, StructureTable};
use crate::symcore::{poisson_bracket, Symbol, SymbolKind};
use crate::{Expr, Rational};

fn model(name: &str, params: &[(&str, i64)]) -> FlatModel {
    let p: BTreeMap<String, Rational> =
        params.iter().map(|(k, v)| (k.to_string(), Rational::from_integer((*v).into()))).collect();
    expand_indices(&builtin_model(name, &p).unwrap()).unwrap()
}

fn source(src: &str) -> FlatModel {
    expand_indices(&parse_model(src).unwrap()).unwrap()
}

struct Run {
    model: FlatModel,
    leg: LegendreResult,
    hset: HamiltonianSet,
    chain: ConstraintChain,
}

fn run(model: FlatModel) -> Run {
    let leg = legendre(&model).unwrap();
    let h0 = build_h0(&leg, &model).unwrap();
    let hset = build_hjpde(&leg, &h0);
    let chain = classify(&run_chain(&hset, DEFAULT_MAX_GENERATIONS), &hset);
    Run { model, leg, hset, chain }
}

fn x(s: Symbol) -> Expr {
    Expr::symbol(s)
}
fn q(name: &str) -> Expr {
    x(Symbol::coordinate(name))
}
fn p(name: &str) -> Expr {
    x(Symbol::coordinate(name).momentum())
}
fn half() -> Expr {
    Expr::constant(Rational::new(1.into(), 2.into()))
}

fn a(i: u32, c: u32) -> Expr {
    x(Symbol::indexed("A", &[i, c]))
}
fn pi(i: u32, c: u32) -> Expr {
    x(Symbol::indexed("A", &[i, c]).momentum())
}
fn a0(c: u32) -> Expr {
    x(Symbol::indexed("A0", &[c]))
}
fn pi0(c: u32) -> Expr {
    x(Symbol::indexed("A0", &[c]).momentum())
}
fn eps(x: u32, y: u32, z: u32) -> Expr {
    Expr::constant(StructureTable::named("eps3").unwrap().get(&[x, y, z]))
}
fn g() -> Expr {
    x(Symbol::coupling("g"))
}

/// `G_a = −g ε_{abc} A_i^b π_c^i`
fn gauss(a_: u32) -> Expr {
    let mut s = Expr::zero();
    for i in 1..=3 {
        for b in 1..=3 {
            for c in 1..=3 {
                s = s + eps(a_, b, c) * a(i, b) * pi(i, c);
            }
        }
    }
    -(g() * s)
}

fn f_squared() -> Expr {
    let mut l = Expr::zero();
    for i in 1..=3 {
        for j in 1..=3 {
            for c in 1..=3 {
                let mut fij = Expr::zero();
                for b in 1..=3 {
                    for d in 1..=3 {
                        fij = fij + g() * eps(c, b, d) * a(i, b) * a(j, d);
                    }
                }
                l = l + fij.pow(2);
            }
        }
    }
    l
}

fn pi_squared() -> Expr {
    let mut s = Expr::zero();
    for i in 1..=3 {
        for c in 1..=3 {
            s = s + pi(i, c).pow(2);
        }
    }
    s
}

#[test]
fn free_particle_legendre() {
    let r = run(model("free-particle", &[]));
    assert_eq!(r.leg.rank, 1);
    assert!(r.leg.primary.is_empty() && r.leg.unsolved.is_empty());
    assert_eq!(r.leg.solved, vec![(Symbol::coordinate("q").velocity(), p("q"))]);
    assert_eq!(r.hset.h0, half() * p("q").pow(2));
    assert_eq!(r.hset.generators.len(), 1);
    assert!(r.chain.constraints.is_empty());
    assert!(r.chain.is_closed());
    assert_eq!(r.chain.generations, 0);
    let flow = derive_flow(&r.hset);
    let t = Symbol::time();
    assert_eq!(flow.coefficient(&Symbol::coordinate("q"), &t), Some(&p("q")));
    assert_eq!(flow.coefficient(&Symbol::coordinate("q").momentum(), &t), Some(&Expr::zero()));
}

#[test]
fn toy_singular_pipeline() {
    let r = run(model("toy-singular", &[]));
    let (v1, q2) = (Symbol::coordinate("q1").velocity(), Symbol::coordinate("q2"));
    assert_eq!(r.leg.rank, 1);
    assert_eq!(r.leg.momenta[0].1, x(v1.clone()) - q("q2"));
    assert_eq!(r.leg.solved, vec![(v1, p("q1") + q("q2"))]);
    assert_eq!(r.leg.unsolved, vec![q2.clone()]);
    assert_eq!(r.leg.primary, vec![(q2.clone(), p("q2"))]);

    assert_eq!(r.hset.h0, half() * p("q1").pow(2) + p("q1") * q("q2"));
    let params: Vec<Symbol> = r.hset.parameters();
    assert_eq!(params, vec![Symbol::time(), q2.clone()]);
    assert_eq!(r.hset.generators[0].expr, x(Symbol::time().momentum()) + &r.hset.h0);
    assert_eq!(r.hset.generators[1].expr, p("q2"));

    let flow = derive_flow(&r.hset);
    let t = Symbol::time();
    assert_eq!(flow.coefficient(&Symbol::coordinate("q1"), &t), Some(&(p("q1") + q("q2"))));
    assert_eq!(flow.coefficient(&Symbol::coordinate("q1").momentum(), &t), Some(&Expr::zero()));
    assert_eq!(flow.coefficient(&q2.momentum(), &t), Some(&-p("q1")));
    assert_eq!(flow.coefficient(&q2.momentum(), &q2), Some(&Expr::zero()));

    assert_eq!(r.chain.generation(0), vec![&p("q2")]);
    assert_eq!(r.chain.generation(1), vec![&p("q1")]);
    assert_eq!(r.chain.generations, 2);
    assert!(r.chain.is_closed());
    assert!(r.chain.constraints.iter().all(|c| c.class == ConstraintClass::First));
}

#[test]
fn toy_first_step_candidate() {
    let r = run(model("toy-singular", &[]));
    let primary = ConstraintChain::primary(&r.hset);
    let step = integrability_step(&r.hset, &primary);
    assert_eq!(step.expressions(), vec![p("q1")]);
    assert!(
        matches!(&step.candidates[0].1, Provenance::Variation { constraint: 0, along } if *along == Symbol::time())
    );
}

#[test]
fn yang_mills_primary_constraints_and_velocities() {
    let r = run(model("yang-mills-su2-homogeneous", &[]));
    assert_eq!(r.leg.rank, 9);
    let expected: Vec<Expr> = (1..=3).map(pi0).collect();
    let got: Vec<Expr> = r.leg.primary.iter().map(|(_, h)| h.clone()).collect();
    assert_eq!(got, expected);
    for i in 1..=3 {
        for c in 1..=3 {
            let v = Symbol::indexed("A", &[i, c]).velocity();
            let mut w = pi(i, c);
            for b in 1..=3 {
                for d in 1..=3 {
                    w = w - g() * eps(c, b, d) * a0(b) * a(i, d);
                }
            }
            assert_eq!(r.leg.solved.iter().find(|(s, _)| *s == v).unwrap().1, w);
        }
    }
}

#[test]
fn yang_mills_h0_matches_reduced_form() {
    let r = run(model("yang-mills-su2-homogeneous", &[]));
    let mut coupling = Expr::zero();
    for c in 1..=3 {
        coupling = coupling + gauss(c) * a0(c);
    }
    let expected = Expr::constant(Rational::new(1.into(), 4.into())) * f_squared() + half() * pi_squared() + coupling;
    assert_eq!(r.hset.h0, expected);
    assert!(r.hset.h0.symbols().iter().all(|s| s.kind() != SymbolKind::Velocity));
}

#[test]
fn yang_mills_chain() {
    let r = run(model("yang-mills-su2-homogeneous", &[]));
    let gen0: Vec<Expr> = r.chain.generation(0).into_iter().cloned().collect();
    assert_eq!(gen0, (1..=3).map(pi0).collect::<Vec<_>>());
    let gen1: Vec<Expr> = r.chain.generation(1).into_iter().cloned().collect();
    assert_eq!(gen1, (1..=3).map(gauss).collect::<Vec<_>>());
    assert_eq!(r.chain.generations, 2);
    assert!(r.chain.is_closed());
    assert_eq!(r.chain.first_class_count(), 6);

    // {H₀, G_a} = g ε_{abc} A0_b G_c, reported dependent with a certificate
    for c in 0..3usize {
        let combo = {
            let mut s = Expr::zero();
            for b in 1..=3 {
                for d in 1..=3 {
                    s = s + g() * eps(c as u32 + 1, b, d) * a0(b) * gauss(d);
                }
            }
            s
        };
        let cert = r
            .chain
            .certificates
            .iter()
            .find(|k| k.provenance == Provenance::Variation { constraint: 3 + c, along: Symbol::time() })
            .expect("certificate for the gauss-law variation");
        assert_eq!(cert.expression, combo);
        let exprs = r.chain.expressions();
        let rebuilt = cert.coefficients.iter().fold(Expr::zero(), |acc, (k, f)| acc + f * &exprs[*k]);
        assert_eq!(rebuilt, combo);
    }
}

#[test]
fn yang_mills_gauss_algebra() {
    let r = run(model("yang-mills-su2-homogeneous", &[]));
    let sig = r.hset.extended_signature();
    for a_ in 1..=3 {
        for b in 1..=3 {
            let mut rhs = Expr::zero();
            for c in 1..=3 {
                rhs = rhs - g() * eps(a_, b, c) * gauss(c);
            }
            assert_eq!(poisson_bracket(&gauss(a_), &gauss(b), &sig), rhs);
        }
    }
}

#[test]
fn yang_mills_flow_matches_brackets() {
    let r = run(model("yang-mills-su2-homogeneous", &[("g", 1)]));
    let flow = derive_flow(&r.hset);
    let sig = r.hset.extended_signature();
    for row in &flow.rows {
        for (k, gen) in r.hset.generators.iter().enumerate() {
            assert_eq!(row.coefficients[k], poisson_bracket(&x(row.variable.clone()), &gen.expr, &sig));
        }
    }
    let t = Symbol::time();
    for (q_, p_) in r.hset.signature.pairs() {
        assert_eq!(flow.coefficient(q_, &t).unwrap(), &r.hset.h0.diff(p_));
        assert_eq!(flow.coefficient(p_, &t).unwrap(), &-r.hset.h0.diff(q_));
    }
    // dπ0_a/dt = −∂H₀/∂A0_a = −G_a
    let gauss1: Expr = gauss(1).substitute(&[(Symbol::coupling("g"), Expr::one())].into_iter().collect());
    assert_eq!(flow.coefficient(&Symbol::indexed("A0", &[1]).momentum(), &t).unwrap(), &-gauss1);
}

#[test]
fn chain_idempotence_and_integrability() {
    for name in ["free-particle", "toy-singular", "yang-mills-su2-homogeneous"] {
        let r = run(model(name, &[]));
        let again = integrability_step(&r.hset, &r.chain);
        assert!(again.candidates.is_empty(), "{name}");
        assert!(involution_residuals(&r.hset, &r.chain).is_empty(), "{name}");
    }
    // truncating the chain breaks involution
    let r = run(model("yang-mills-su2-homogeneous", &[]));
    let primary = ConstraintChain::primary(&r.hset);
    assert!(!involution_residuals(&r.hset, &primary).is_empty());
}

#[test]
fn proca_fixes_the_parameter_rate() {
    let r = run(model("proca-homogeneous", &[("m", 2)]));
    assert_eq!(r.chain.generations, 2);
    assert!(r.chain.is_closed());
    assert_eq!(r.chain.second_class().len(), 2);
    assert_eq!(r.chain.parameter_relations.len(), 1);
    assert!(r.chain.parameter_relations[0].rate.is_zero());
    assert_eq!(r.chain.generation(1), vec![&(Expr::constant(Rational::from_integer((-4).into())) * q_a0())]);
}

fn q_a0() -> Expr {
    x(Symbol::coordinate("A0"))
}

#[test]
fn legendre_round_trip_every_builtin() {
    for (name, params) in [
        ("free-particle", vec![]),
        ("toy-singular", vec![]),
        ("yang-mills-su2-homogeneous", vec![]),
        ("proca-homogeneous", vec![("m", 3)]),
    ] {
        let m = model(name, &params);
        let leg = legendre(&m).unwrap();
        assert_eq!(leg.solved.len() + leg.unsolved.len(), m.coordinates.len());
        assert_eq!(leg.rank, m.coordinates.len() - leg.unsolved.len());
    }
}

#[test]
fn unsupported_and_degenerate_lagrangians() {
    let err = legendre(&source("coordinates: q\nlagrangian: dot(q)^4")).unwrap_err();
    assert!(err.is_unsupported(), "{err}");

    // no velocities at all: every momentum is primary, H₀ = −L
    let m = source("coordinates: q1, q2\nlagrangian: q1*q2");
    let leg = legendre(&m).unwrap();
    assert_eq!(leg.rank, 0);
    assert_eq!(leg.primary.len(), 2);
    assert_eq!(build_h0(&leg, &m).unwrap(), -(q("q1") * q("q2")));
}

#[test]
fn rank_deficient_block_solves_for_momentum() {
    let m = source("coordinates: q1, q2\nlagrangian: (dot(q1) + dot(q2))^2/2 - q1^2/2");
    let leg = legendre(&m).unwrap();
    assert_eq!(leg.primary, vec![(Symbol::coordinate("q2"), p("q2") - p("q1"))]);
    let h0 = build_h0(&leg, &m).unwrap();
    assert_eq!(h0, half() * p("q1").pow(2) + half() * q("q1").pow(2));
}

#[test]
fn open_chain_at_cap() {
    let r = run(model("yang-mills-su2-homogeneous", &[]));
    let capped = run_chain(&r.hset, 1);
    assert_eq!(capped.closure, Closure::Open);
    assert_eq!(capped.generations, 1);
    let capped = classify(&capped, &r.hset);
    assert!(capped.constraints.iter().all(|c| c.class == ConstraintClass::Unresolved));
}

#[test]
fn second_class_pair() {
    // L = 1/2 dot(q1)^2 - q2*q1: p2, q1, -p1, -q2, and the last one pins
    // the rate of q2 to zero
    let r = run(source("coordinates: q1, q2\nlagrangian: dot(q1)^2/2 - q2*q1"));
    assert!(r.chain.is_closed());
    assert_eq!(r.chain.expressions(), vec![p("q2"), q("q1"), -p("q1"), -q("q2")]);
    assert_eq!(r.chain.second_class().len(), 4);
    assert_eq!(r.chain.parameter_relations.len(), 1);
    assert_eq!(r.model.coordinates.len(), 2);
}
