use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::symbol::Symbol;

/// Coefficient ring of a polynomial. Exact rationals in the symbolic
/// layer, floats when an expression is compiled for numerics.
pub trait Coeff:
    Clone
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
{
}

impl<T> Coeff for T where
    T: Clone
        + PartialEq
        + fmt::Debug
        + Zero
        + One
        + Neg<Output = T>
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
{
}

/// Coefficient field: a ring with exact division by nonzero elements.
pub trait FieldCoeff: Coeff + Div<Output = Self> {}

impl<T> FieldCoeff for T where T: Coeff + Div<Output = T> {}

/// Power product of symbols, factors sorted by the symbol order with
/// positive exponents.
///
/// Ordered graded-lexicographically: total degree first, then the
/// exponent vector with the smallest symbol most significant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Symbol, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(symbol: Symbol) -> Self {
        Monomial(vec![(symbol, 1)])
    }

    /// Builds a monomial from arbitrary factors, merging repeats.
    pub fn from_factors(factors: impl IntoIterator<Item = (Symbol, u32)>) -> Self {
        let mut map: BTreeMap<Symbol, u32> = BTreeMap::new();
        for (s, e) in factors {
            if e > 0 {
                *map.entry(s).or_insert(0) += e;
            }
        }
        Monomial(map.into_iter().collect())
    }

    pub fn factors(&self) -> &[(Symbol, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn degree_in(&self, symbol: &Symbol) -> u32 {
        self.0.binary_search_by(|(s, _)| s.cmp(symbol)).map(|i| self.0[i].1).unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().all(|(s, e)| other.degree_in(s) >= *e)
    }

    /// `other / self`, assuming `self.divides(other)`.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        let factors = other.0.iter().map(|(s, e)| (s.clone(), e - self.degree_in(s))).filter(|(_, e)| *e > 0).collect();
        Monomial(factors)
    }

    /// Removes `symbol` entirely, returning the stripped monomial and the
    /// exponent it carried.
    pub fn split_off(&self, symbol: &Symbol) -> (Monomial, u32) {
        let e = self.degree_in(symbol);
        let rest = self.0.iter().filter(|(s, _)| s != symbol).cloned().collect();
        (Monomial(rest), e)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            match a.0.cmp(&b.0) {
                // smaller symbol present only on the left: left is larger
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => match a.1.cmp(&b.1) {
                    Ordering::Equal => {}
                    ord => return ord,
                },
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, (s, e)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Polynomial in canonical normal form: a map from monomial to nonzero
/// coefficient. Two equal polynomials have identical representations.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly<C> {
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coeff> Default for Poly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coeff> Poly<C> {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn symbol(s: Symbol) -> Self {
        Self::term(C::one(), Monomial::var(s))
    }

    pub fn term(c: C, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = existing.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &C)> {
        self.terms.last_key_value()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn constant_value(&self) -> Option<C> {
        if self.is_constant() {
            Some(self.coefficient(&Monomial::one()))
        } else {
            None
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, s: &Symbol) -> u32 {
        self.terms.keys().map(|m| m.degree_in(s)).max().unwrap_or(0)
    }

    /// Maximum over monomials of the summed exponents of `set`.
    pub fn degree_in_set(&self, set: &BTreeSet<Symbol>) -> u32 {
        self.terms
            .keys()
            .map(|m| m.factors().iter().filter(|(s, _)| set.contains(s)).map(|(_, e)| e).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.terms.keys().flat_map(|m| m.factors().iter().map(|(s, _)| s.clone())).collect()
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        self.terms.keys().any(|m| m.degree_in(s) > 0)
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let terms = self.terms.iter().map(|(m, k)| (m.clone(), k.clone() * c.clone()));
        Self::from_terms(terms)
    }

    pub fn mul_term(&self, c: &C, m: &Monomial) -> Self {
        let terms = self.terms.iter().map(|(k, v)| (k.mul(m), v.clone() * c.clone()));
        Self::from_terms(terms)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Formal partial derivative; every other symbol is independent.
    pub fn diff(&self, v: &Symbol) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let (rest, e) = m.split_off(v);
            if e == 0 {
                continue;
            }
            let mono = rest.mul(&Monomial::from_factors([(v.clone(), e - 1)]));
            out.add_term(mono, c.clone() * from_u32::<C>(e));
        }
        out
    }

    /// Simultaneous substitution of every bound symbol.
    pub fn substitute(&self, bindings: &BTreeMap<Symbol, Poly<C>>) -> Self {
        if bindings.is_empty() {
            return self.clone();
        }
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut kept = Vec::new();
            let mut product = Self::constant(c.clone());
            for (s, e) in m.factors() {
                match bindings.get(s) {
                    Some(value) => product = &product * &value.pow(*e),
                    None => kept.push((s.clone(), *e)),
                }
            }
            let kept = Monomial::from_factors(kept);
            for (pm, pc) in product.terms {
                out.add_term(pm.mul(&kept), pc);
            }
        }
        out
    }

    /// Splits into powers of `s`: `self = Σ_k coeffs[k] · s^k`.
    pub fn collect(&self, s: &Symbol) -> Vec<Self> {
        let mut out: Vec<Self> = vec![Self::zero(); self.degree_in(s) as usize + 1];
        for (m, c) in &self.terms {
            let (rest, e) = m.split_off(s);
            out[e as usize].add_term(rest, c.clone());
        }
        out
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    /// Evaluates with a caller-supplied value for every symbol.
    pub fn eval<T>(&self, coeff: impl Fn(&C) -> T, var: impl Fn(&Symbol) -> T) -> T
    where
        T: Clone + Zero + One + Mul<Output = T> + Add<Output = T>,
    {
        let mut acc = T::zero();
        for (m, c) in &self.terms {
            let mut t = coeff(c);
            for (s, e) in m.factors() {
                let x = var(s);
                for _ in 0..*e {
                    t = t * x.clone();
                }
            }
            acc = acc + t;
        }
        acc
    }
}

fn from_u32<C: Coeff>(n: u32) -> C {
    let mut acc = C::zero();
    for _ in 0..n {
        acc = acc + C::one();
    }
    acc
}

impl<C: Coeff> Zero for Poly<C> {
    fn zero() -> Self {
        Poly::zero()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<C: Coeff> One for Poly<C> {
    fn one() -> Self {
        Poly::one()
    }
}

impl<C: Coeff> Add<&Poly<C>> for &Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: &Poly<C>) -> Poly<C> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<C: Coeff> Sub<&Poly<C>> for &Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: &Poly<C>) -> Poly<C> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<C: Coeff> Mul<&Poly<C>> for &Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: &Poly<C>) -> Poly<C> {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<C: Coeff> Neg for &Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl<C: Coeff> $tr<Poly<C>> for Poly<C> {
            type Output = Poly<C>;
            fn $f(self, rhs: Poly<C>) -> Poly<C> {
                (&self).$f(&rhs)
            }
        }
        impl<C: Coeff> $tr<&Poly<C>> for Poly<C> {
            type Output = Poly<C>;
            fn $f(self, rhs: &Poly<C>) -> Poly<C> {
                (&self).$f(rhs)
            }
        }
        impl<C: Coeff> $tr<Poly<C>> for &Poly<C> {
            type Output = Poly<C>;
            fn $f(self, rhs: Poly<C>) -> Poly<C> {
                self.$f(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<C: Coeff> Neg for Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        -&self
    }
}

impl<C: Coeff + fmt::Display> fmt::Display for Poly<C> {
    /// Highest monomial first; `c*m` with unit coefficients elided.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let body = if m.is_one() {
                c.to_string()
            } else if c.is_one() {
                m.to_string()
            } else if *c == -C::one() {
                format!("-{m}")
            } else {
                format!("{c}*{m}")
            };
            if k == 0 {
                write!(f, "{body}")?;
            } else if let Some(rest) = body.strip_prefix('-') {
                write!(f, " - {rest}")?;
            } else {
                write!(f, " + {body}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Expr, Rational};

    fn q() -> Symbol {
        Symbol::coordinate("q")
    }
    fn p() -> Symbol {
        q().momentum()
    }
    fn x(s: Symbol) -> Expr {
        Expr::symbol(s)
    }
    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn ring_identity() {
        let e = (&x(q()) + &x(p())) * (&x(q()) - &x(p()));
        let expected = x(q()).pow(2) - x(p()).pow(2);
        assert_eq!(e, expected);
        assert_eq!(e.to_string(), "q^2 - p^2");
    }

    #[test]
    fn cancellation_and_exactness() {
        assert!((x(q()) - x(q())).is_zero());
        let half = x(q()).scale(&r(1, 2));
        let back = half.scale(&r(2, 1));
        assert_eq!(back, x(q()));
        assert_eq!(back.coefficient(&Monomial::var(q())), r(1, 1));
    }

    #[test]
    fn power_rule_and_products() {
        assert_eq!(x(p()).pow(2).diff(&p()), x(p()).scale(&r(2, 1)));
        let e = x(q()).pow(2) * x(p());
        assert_eq!(e.diff(&q()), (x(q()) * x(p())).scale(&r(2, 1)));
        assert!(Expr::constant(r(7, 3)).diff(&q()).is_zero());
    }

    #[test]
    fn substitution() {
        let mut b = BTreeMap::new();
        b.insert(p(), Expr::zero());
        assert!((x(p()) * x(q())).substitute(&b).is_zero());
        let mut b = BTreeMap::new();
        b.insert(p(), x(q()) + Expr::one());
        let expected = x(q()).pow(2) + x(q()).scale(&r(2, 1)) + Expr::one();
        assert_eq!(x(p()).pow(2).substitute(&b), expected);
        assert_eq!(x(q()).substitute(&BTreeMap::new()), x(q()));
    }

    #[test]
    fn substitution_is_simultaneous() {
        let a = Symbol::coordinate("a");
        let b = Symbol::coordinate("b");
        let mut bind = BTreeMap::new();
        bind.insert(a.clone(), x(b.clone()));
        bind.insert(b.clone(), x(a.clone()));
        let e = x(a.clone()) - x(b.clone()).pow(2);
        assert_eq!(e.substitute(&bind), x(b) - x(a).pow(2));
    }

    #[test]
    fn grlex_order() {
        let a = Symbol::coordinate("a");
        let b = Symbol::coordinate("b");
        let ab = Monomial::from_factors([(a.clone(), 1), (b.clone(), 1)]);
        let aa = Monomial::from_factors([(a.clone(), 2)]);
        let bb = Monomial::from_factors([(b.clone(), 2)]);
        let ma = Monomial::var(a);
        assert!(aa > ab && ab > bb && bb > ma && ma > Monomial::one());
    }

    #[test]
    fn display_signs() {
        let e = x(q()).scale(&r(-1, 2)) + Expr::constant(r(3, 1));
        assert_eq!(e.to_string(), "-1/2*q + 3");
        assert_eq!(Expr::zero().to_string(), "0");
    }

    #[test]
    fn collect_powers() {
        let e = x(q()).pow(2) * x(p()) + x(q()) + Expr::one();
        let parts = e.collect(&q());
        assert_eq!(parts.len(), 3);
        assert_eq!(parts[2], x(p()));
        assert_eq!(parts[1], Expr::one());
        assert_eq!(parts[0], Expr::one());
    }
}
