use num_traits::Zero;

use super::{SymError, Symbol};
use crate::{Expr, Rational};

/// Unnormalized expression tree over scalar symbols.
#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Num(Rational),
    Sym(Symbol),
    Add(Vec<Term>),
    Mul(Vec<Term>),
    Neg(Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Div(Box<Term>, Box<Term>),
    Pow(Box<Term>, i64),
}

impl Term {
    pub fn int(n: i64) -> Term {
        Term::Num(Rational::from_integer(n.into()))
    }

    pub fn sym(s: Symbol) -> Term {
        Term::Sym(s)
    }
}

/// Reduces a tree to its canonical polynomial form.
///
/// Division is accepted only by a nonzero constant, and negative powers
/// only of a constant base.
pub fn normalize(term: &Term) -> Result<Expr, SymError> {
    Ok(match term {
        Term::Num(r) => Expr::constant(r.clone()),
        Term::Sym(s) => Expr::symbol(s.clone()),
        Term::Add(items) => {
            let mut acc = Expr::zero();
            for t in items {
                acc = acc + normalize(t)?;
            }
            acc
        }
        Term::Mul(items) => {
            let mut acc = Expr::one();
            for t in items {
                acc = acc * normalize(t)?;
            }
            acc
        }
        Term::Neg(t) => -normalize(t)?,
        Term::Sub(a, b) => normalize(a)? - normalize(b)?,
        Term::Div(a, b) => {
            let num = normalize(a)?;
            let den = normalize(b)?;
            let c = constant_divisor(&den)?;
            num.scale(&c.recip())
        }
        Term::Pow(base, n) => {
            let b = normalize(base)?;
            if *n >= 0 {
                b.pow(*n as u32)
            } else {
                let c = constant_divisor(&b)?;
                Expr::constant(c.recip()).pow(n.unsigned_abs() as u32)
            }
        }
    })
}

fn constant_divisor(den: &Expr) -> Result<Rational, SymError> {
    match den.constant_value() {
        Some(c) if c.is_zero() => Err(SymError::DivisionByZero),
        Some(c) => Ok(c),
        None => Err(SymError::Unsupported(format!("division by non-constant expression `{den}`"))),
    }
}
