//! Fixed-order multivariate division and reduction modulo a constraint set.
//!
//! Division is not a complete ideal-membership test. [`SurfaceReducer`]
//! interreduces its divisors first so that sets differing by invertible
//! linear recombination (the common case for constraint sets) reduce each
//! other to zero.

use super::{FieldCoeff, Monomial, Poly};

#[derive(Clone, Debug, PartialEq)]
pub struct Division<C> {
    pub quotients: Vec<Poly<C>>,
    pub remainder: Poly<C>,
}

/// Divides `p` by `divisors` in order: `p = Σ quotients[i]·divisors[i] + remainder`,
/// where no term of the remainder is divisible by a divisor's leading monomial.
pub fn divide<C: FieldCoeff>(p: &Poly<C>, divisors: &[Poly<C>]) -> Division<C> {
    let leads: Vec<Option<(Monomial, C)>> =
        divisors.iter().map(|d| d.leading_term().map(|(m, c)| (m.clone(), c.clone()))).collect();
    let mut quotients = vec![Poly::zero(); divisors.len()];
    let mut remainder = Poly::zero();
    let mut rest = p.clone();
    while let Some((m, c)) = rest.leading_term().map(|(m, c)| (m.clone(), c.clone())) {
        let hit = leads.iter().enumerate().find_map(|(i, lead)| match lead {
            Some((lm, lc)) if lm.divides(&m) => Some((i, lm.quotient_of(&m), c.clone() / lc.clone())),
            _ => None,
        });
        match hit {
            Some((i, qm, qc)) => {
                rest = rest - divisors[i].mul_term(&qc, &qm);
                quotients[i] = &quotients[i] + &Poly::term(qc, qm);
            }
            None => {
                let lt = Poly::term(c, m);
                rest = &rest - &lt;
                remainder = remainder + lt;
            }
        }
    }
    Division { quotients, remainder }
}

/// Exact quotient `p / d`, if `d` divides `p`.
pub fn exact_quotient<C: FieldCoeff>(p: &Poly<C>, d: &Poly<C>) -> Option<Poly<C>> {
    let mut div = divide(p, std::slice::from_ref(d));
    if div.remainder.is_zero() {
        div.quotients.pop()
    } else {
        None
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reduction<C> {
    pub remainder: Poly<C>,
    /// Cofactors over the reducer's original generators:
    /// `input = Σ certificate[i]·generators[i] + remainder`.
    pub certificate: Vec<Poly<C>>,
}

/// Reducer modulo a fixed generator set, with cofactor tracking.
#[derive(Clone, Debug)]
pub struct SurfaceReducer<C> {
    generators: Vec<Poly<C>>,
    // (basis element, its cofactors over `generators`)
    basis: Vec<(Poly<C>, Vec<Poly<C>>)>,
}

impl<C: FieldCoeff> SurfaceReducer<C> {
    pub fn new(generators: &[Poly<C>]) -> Self {
        let n = generators.len();
        let mut basis: Vec<(Poly<C>, Vec<Poly<C>>)> = generators
            .iter()
            .enumerate()
            .filter(|(_, g)| !g.is_zero())
            .map(|(i, g)| {
                let mut e = vec![Poly::zero(); n];
                e[i] = Poly::one();
                (g.clone(), e)
            })
            .collect();
        // Replace any element whose leading monomial is divisible by
        // another's until the leading monomials form an antichain.
        loop {
            let clash = (0..basis.len()).find(|&i| {
                let li = basis[i].0.leading_term().map(|(m, _)| m.clone()).unwrap();
                (0..basis.len()).any(|j| j != i && basis[j].0.leading_term().unwrap().0.divides(&li))
            });
            let Some(i) = clash else { break };
            let (target, cof) = basis.remove(i);
            let divisors: Vec<Poly<C>> = basis.iter().map(|(b, _)| b.clone()).collect();
            let div = divide(&target, &divisors);
            if div.remainder.is_zero() {
                continue;
            }
            let mut new_cof = cof;
            for (q, (_, bc)) in div.quotients.iter().zip(basis.iter()) {
                if q.is_zero() {
                    continue;
                }
                for (k, c) in new_cof.iter_mut().enumerate() {
                    *c = &*c - &(q * &bc[k]);
                }
            }
            basis.push((div.remainder, new_cof));
        }
        basis.sort_by(|a, b| a.0.leading_term().unwrap().0.cmp(b.0.leading_term().unwrap().0));
        SurfaceReducer { generators: generators.to_vec(), basis }
    }

    pub fn generators(&self) -> &[Poly<C>] {
        &self.generators
    }

    pub fn reduce(&self, p: &Poly<C>) -> Reduction<C> {
        let divisors: Vec<Poly<C>> = self.basis.iter().map(|(b, _)| b.clone()).collect();
        let div = divide(p, &divisors);
        let mut certificate = vec![Poly::zero(); self.generators.len()];
        for (q, (_, cof)) in div.quotients.iter().zip(self.basis.iter()) {
            if q.is_zero() {
                continue;
            }
            for (k, c) in certificate.iter_mut().enumerate() {
                if !cof[k].is_zero() {
                    *c = &*c + &(q * &cof[k]);
                }
            }
        }
        Reduction { remainder: div.remainder, certificate }
    }

    pub fn reduces_to_zero(&self, p: &Poly<C>) -> bool {
        self.reduce(p).remainder.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::Symbol;
    use crate::Expr;

    fn p(i: u32) -> Expr {
        Expr::symbol(Symbol::coordinate(format!("q{i}")).momentum())
    }

    #[test]
    fn division_identity_holds() {
        let x = p(1);
        let y = p(2);
        let f = x.pow(2) * y.clone() + x.clone() * y.pow(2) + y.pow(2);
        let ds = vec![x.clone() * y.clone() - Expr::one(), y.pow(2) - Expr::one()];
        let div = divide(&f, &ds);
        let mut back = div.remainder.clone();
        for (q, d) in div.quotients.iter().zip(&ds) {
            back = back + q * d;
        }
        assert_eq!(back, f);
    }

    #[test]
    fn interreduction_handles_linear_recombination() {
        let gens = vec![&p(1) + &p(2), &p(1) - &p(2)];
        let red = SurfaceReducer::new(&gens);
        for target in [p(1), p(2)] {
            let r = red.reduce(&target);
            assert!(r.remainder.is_zero());
            let rebuilt = r.certificate.iter().zip(&gens).fold(Expr::zero(), |acc, (c, g)| acc + c * g);
            assert_eq!(rebuilt, target);
        }
    }

    #[test]
    fn strict_inclusion_leaves_remainder() {
        let red = SurfaceReducer::new(&[p(1)]);
        assert_eq!(red.reduce(&p(2)).remainder, p(2));
    }

    #[test]
    fn exact_quotients() {
        let a = p(1) + Expr::one();
        let b = p(2) - p(1);
        assert_eq!(exact_quotient(&(&a * &b), &a), Some(b.clone()));
        assert_eq!(exact_quotient(&(&b + &Expr::one()), &a), None);
    }
}
