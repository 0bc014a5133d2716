use std::collections::BTreeMap;

use proptest::prelude::*;

use super::*;
use crate::symcore::{SymError, Symbol};
use crate::{Expr, Rational};

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn sym(name: &str) -> Expr {
    Expr::symbol(Symbol::coordinate(name))
}

#[test]
fn two_coordinate_source() {
    let spec = parse_model("coordinates: q1, q2\nlagrangian: (dot(q1) - q2)^2 / 2").unwrap();
    assert_eq!(spec.coordinates.len(), 2);
    let flat = expand_indices(&spec).unwrap();
    let v1 = Expr::symbol(Symbol::coordinate("q1").velocity());
    let expected = (&v1 - &sym("q2")).pow(2).scale(&r(1, 2));
    assert_eq!(flat.lagrangian, expected);
}

#[test]
fn indexed_source_echoes_domain() {
    let src = "model \"m\"\nindices: a in 1..3\ntables: f = eps3\ncoordinates: x[a]\nlagrangian: sum(a, dot(x[a])^2)";
    let spec = parse_model(src).unwrap();
    assert_eq!(spec.indices, vec![IndexDomain { name: "a".into(), lo: 1, hi: 3 }]);
    assert_eq!(spec.table("f").unwrap().get(&[1, 2, 3]), r(1, 1));
}

#[test]
fn division_by_symbol_is_rejected() {
    let err = parse_model("lagrangian: dot(q1)/q2").unwrap_err();
    assert!(err.is_unsupported(), "{err}");
    let spec = parse_model("coordinates: q\nlagrangian: dot(q)^2/(1 - 1)").unwrap();
    let err = expand_indices(&spec).unwrap_err();
    assert!(matches!(err, ModelError::Symbolic(SymError::DivisionByZero)), "{err}");
}

#[test]
fn nested_dot_is_rejected() {
    let err = parse_model("coordinates: q\nlagrangian: dot(dot(q))^2").unwrap_err();
    assert!(err.is_unsupported());
}

#[test]
fn syntax_error_reports_position() {
    let err = parse_model("coordinates: q\nlagrangian: dot(q) *").unwrap_err();
    assert!(matches!(err, ModelError::Syntax { span, .. } if span.line == 2 && span.col == 21), "{err:?}");
}

#[test]
fn undeclared_and_unbound_indices() {
    let err = parse_model("coordinates: x[a]\nlagrangian: 1").unwrap_err();
    assert!(matches!(err, ModelError::UndeclaredIndex { .. }));
    let err = parse_model("indices: a in 1..2\ncoordinates: x[a]\nlagrangian: x[a]").unwrap_err();
    assert!(matches!(err, ModelError::UnboundIndex { .. }));
    let err = parse_model("indices: a in 1..2\ncoordinates: x[a]\nlagrangian: sum(b, x[b])").unwrap_err();
    assert!(matches!(err, ModelError::UndeclaredIndex { .. }));
}

#[test]
fn bad_tables_are_rejected_at_load() {
    let err = parse_model("tables: f = {1 2 3: 1, 2 1 3: 1}\ncoordinates: q\nlagrangian: dot(q)^2").unwrap_err();
    assert!(matches!(err, ModelError::NotAntisymmetric { .. }), "{err}");
    let src = "tables: f = {1 2 3: 1, 2 3 1: 1, 3 1 2: 1, 2 1 3: -1, 1 3 2: -1, 3 2 1: -1, \
               3 4 5: 1, 4 5 3: 1, 5 3 4: 1, 4 3 5: -1, 3 5 4: -1, 5 4 3: -1}\ncoordinates: q\nlagrangian: dot(q)^2";
    let err = parse_model(src).unwrap_err();
    assert!(matches!(err, ModelError::JacobiViolation { .. }), "{err}");
}

#[test]
fn finite_sum_expands() {
    let spec = parse_model("indices: a in 1..2\ncoordinates: q[a]\nlagrangian: sum(a, q[a]^2)").unwrap();
    let flat = expand_indices(&spec).unwrap();
    let q1 = Expr::symbol(Symbol::indexed("q", &[1]));
    let q2 = Expr::symbol(Symbol::indexed("q", &[2]));
    assert_eq!(flat.lagrangian, q1.pow(2) + q2.pow(2));
}

#[test]
fn literal_index_out_of_range() {
    let spec = parse_model("indices: a in 1..3\ncoordinates: x[a]\nlagrangian: dot(x[4])^2").unwrap();
    assert!(matches!(expand_indices(&spec), Err(ModelError::IndexOutOfRange { value: 4, .. })));
}

#[test]
fn table_application_expands_to_entries() {
    let src = "indices: a in 1..3, b in 1..3, c in 1..3\ntables: f = eps3\ncoordinates: x[a]\n\
               lagrangian: sum(a, sum(b, sum(c, f(a,b,c)*x[a]*x[b]*dot(x[c]))))";
    let flat = expand_indices(&parse_model(src).unwrap()).unwrap();
    // totally antisymmetric contraction against the symmetric x[a]x[b]
    assert!(flat.lagrangian.is_zero());
}

#[test]
fn builtin_free_particle_and_toy() {
    let flat = expand_indices(&builtin_model("free-particle", &BTreeMap::new()).unwrap()).unwrap();
    let v = Expr::symbol(Symbol::coordinate("q").velocity());
    assert_eq!(flat.lagrangian, v.pow(2).scale(&r(1, 2)));

    let flat = expand_indices(&builtin_model("toy-singular", &BTreeMap::new()).unwrap()).unwrap();
    let v1 = Expr::symbol(Symbol::coordinate("q1").velocity());
    assert_eq!(flat.lagrangian, (&v1 - &sym("q2")).pow(2).scale(&r(1, 2)));
}

#[test]
fn builtin_errors() {
    assert!(matches!(builtin_model("nope", &BTreeMap::new()), Err(ModelError::UnknownModel(_))));
    assert!(matches!(builtin_model("proca-homogeneous", &BTreeMap::new()), Err(ModelError::MissingCoupling { .. })));
    let mut p = BTreeMap::new();
    p.insert("zz".to_string(), r(1, 1));
    assert!(matches!(builtin_model("toy-singular", &p), Err(ModelError::UnknownParameter { .. })));
}

fn ym(g: Option<i64>) -> FlatModel {
    let mut p = BTreeMap::new();
    if let Some(g) = g {
        p.insert("g".to_string(), r(g, 1));
    }
    expand_indices(&builtin_model("yang-mills-su2-homogeneous", &p).unwrap()).unwrap()
}

/// Independent construction of the homogeneous Lagrangian straight from
/// the field-strength components.
fn ym_lagrangian_by_hand(g: &Expr) -> Expr {
    let eps = StructureTable::named("eps3").unwrap();
    let a = |i: u32, c: u32| Expr::symbol(Symbol::indexed("A", &[i, c]));
    let a0 = |c: u32| Expr::symbol(Symbol::indexed("A0", &[c]));
    let e = |x: u32, y: u32, z: u32| Expr::constant(eps.get(&[x, y, z]));
    let mut l = Expr::zero();
    for i in 1..=3 {
        for c in 1..=3 {
            let mut f0i = Expr::symbol(Symbol::indexed("A", &[i, c]).velocity());
            for b in 1..=3 {
                for d in 1..=3 {
                    f0i = f0i + g * &e(c, b, d) * a0(b) * a(i, d);
                }
            }
            l = l + f0i.pow(2).scale(&r(1, 2));
        }
    }
    for i in 1..=3 {
        for j in 1..=3 {
            for c in 1..=3 {
                let mut fij = Expr::zero();
                for b in 1..=3 {
                    for d in 1..=3 {
                        fij = fij + g * &e(c, b, d) * a(i, b) * a(j, d);
                    }
                }
                l = l - fij.pow(2).scale(&r(1, 4));
            }
        }
    }
    l
}

#[test]
fn yang_mills_expands_to_twelve_coordinates() {
    let flat = ym(Some(1));
    assert_eq!(flat.coordinates.len(), 12);
    assert_eq!(flat.coordinates.iter().filter(|s| s.name() == "A0").count(), 3);
    assert_eq!(flat.lagrangian, ym_lagrangian_by_hand(&Expr::one()));
    let symbolic = ym(None);
    let g = Expr::symbol(Symbol::coupling("g"));
    assert_eq!(symbolic.lagrangian, ym_lagrangian_by_hand(&g));
}

#[test]
fn yang_mills_is_invariant_under_cyclic_color_shift() {
    let flat = ym(None);
    let shift = |c: u32| c % 3 + 1;
    let mut bind = BTreeMap::new();
    for q in &flat.coordinates {
        let mut idx = q.indices().to_vec();
        let last = idx.len() - 1;
        idx[last] = shift(idx[last]);
        let to = Symbol::indexed(q.name(), &idx);
        bind.insert(q.clone(), Expr::symbol(to.clone()));
        bind.insert(q.velocity(), Expr::symbol(to.velocity()));
    }
    assert_eq!(flat.lagrangian.substitute(&bind), flat.lagrangian);
}

#[test]
fn expansion_is_deterministic_and_sorted() {
    let a = ym(None);
    let b = ym(None);
    assert_eq!(a, b);
    let mut sorted = a.coordinates.clone();
    sorted.sort();
    assert_eq!(sorted, a.coordinates);
}

#[test]
fn builtin_sources_round_trip() {
    for name in builtin_names() {
        let spec = parse_model(builtin_source(name).unwrap()).unwrap();
        let again = parse_model(&spec.to_string()).unwrap();
        assert_eq!(spec, again, "{name}");
    }
}

#[test]
fn scalar_expressions_over_flat_model() {
    let flat = ym(Some(1));
    let e = flat.parse_expr("A0[1] + pi[2,3]*g - 1/2").unwrap();
    let expected = Expr::symbol(Symbol::indexed("A0", &[1])) + Expr::symbol(Symbol::indexed("A", &[2, 3]).momentum())
        - Expr::constant(r(1, 2));
    assert_eq!(e, expected);
    assert!(flat.parse_expr("B[1]").is_err());
    assert!(flat.parse_expr("A0[1]/A0[2]").is_err());
}

#[test]
fn rendered_expressions_reparse() {
    let flat = ym(None);
    let l = &flat.lagrangian;
    assert_eq!(&flat.parse_expr(&l.to_string()).unwrap(), l);
}

fn arb_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0u32..20).prop_map(|n| n.to_string()),
        (1u32..9, 2u32..9).prop_map(|(a, b)| format!("{a}/{b}")),
        Just("q1".to_string()),
        Just("q2".to_string()),
        Just("g".to_string()),
        Just("dot(q1)".to_string()),
        (1u32..3).prop_map(|i| format!("x[{i}]")),
        Just("x[a]".to_string()),
        Just("f(a,1,2)".to_string()),
    ];
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) + ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            (inner.clone(), 1u32..5).prop_map(|(a, n)| format!("({a})/{n}")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (inner.clone(), 0u32..4).prop_map(|(a, n)| format!("({a})^{n}")),
            inner.prop_map(|a| format!("sum(a, {a})")),
        ]
    })
}

proptest! {
    #[test]
    fn pretty_print_round_trip(body in arb_expr()) {
        let src = format!(
            "model \"p\"\nindices: a in 1..2\ncouplings: g = -3/2\ntables: f = eps3\ncoordinates: q1, q2, x[a]\nlagrangian: sum(a, {body})"
        );
        let spec = parse_model(&src).unwrap();
        let printed = spec.to_string();
        let again = parse_model(&printed).unwrap();
        prop_assert_eq!(&spec, &again);
        prop_assert_eq!(expand_indices(&spec).unwrap(), expand_indices(&again).unwrap());
    }
}
