//! Recursive-descent parser for `.hjm` model sources (LL(1); see
//! `docs/hjm.grammar`).

use std::collections::HashSet;

use num_traits::Zero;

use super::ast::{CoordinateDecl, CouplingDecl, IndexArg, IndexDomain, ModelExpr, ModelSpec, Span, TableDecl};
use super::lexer::{tokenize, Tok};
use super::tables::{StructureTable, TableDefect};
use super::ModelError;
use crate::Rational;

const SECTIONS: [&str; 6] = ["model", "indices", "couplings", "tables", "coordinates", "lagrangian"];
const RESERVED: [&str; 10] =
    ["model", "indices", "couplings", "tables", "coordinates", "lagrangian", "in", "dot", "sum", "t"];

pub(crate) struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    pub(crate) fn new(src: &str) -> Result<Self, ModelError> {
        Ok(Parser { toks: tokenize(src)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Span, ModelError> {
        if *self.peek() == want {
            Ok(self.bump().1)
        } else {
            Err(self.unexpected(&want.describe()))
        }
    }

    fn unexpected(&self, wanted: &str) -> ModelError {
        ModelError::syntax(self.span(), format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn ident(&mut self) -> Result<(String, Span), ModelError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let sp = self.bump().1;
                Ok((s, sp))
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn at_section(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if SECTIONS.contains(&s.as_str())) || *self.peek() == Tok::Eof
    }

    fn number(&mut self) -> Result<(Rational, Span), ModelError> {
        match self.peek().clone() {
            Tok::Number(s) => {
                let sp = self.bump().1;
                Ok((parse_number(&s), sp))
            }
            _ => Err(self.unexpected("number")),
        }
    }

    fn small_int(&mut self) -> Result<u32, ModelError> {
        let (r, sp) = self.number()?;
        if !r.is_integer() {
            return Err(ModelError::syntax(sp, "expected an integer"));
        }
        r.to_integer().try_into().map_err(|_| ModelError::syntax(sp, "integer out of range"))
    }

    /// `'-'? NUMBER ('/' NUMBER)?`
    fn signed_rational(&mut self) -> Result<Rational, ModelError> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let (mut r, _) = self.number()?;
        if *self.peek() == Tok::Slash {
            self.bump();
            let (d, sp) = self.number()?;
            if d.is_zero() {
                return Err(ModelError::Unsupported { span: sp, message: "division by zero".into() });
            }
            r /= d;
        }
        Ok(if neg { -r } else { r })
    }

    pub(crate) fn parse_model(&mut self) -> Result<ModelSpec, ModelError> {
        let mut spec = ModelSpec {
            name: String::new(),
            indices: Vec::new(),
            couplings: Vec::new(),
            tables: Vec::new(),
            coordinates: Vec::new(),
            lagrangian: ModelExpr::Num(Rational::zero()),
        };
        let mut seen = HashSet::new();
        let mut have_lagrangian = false;
        while *self.peek() != Tok::Eof {
            let (kw, sp) = self.ident()?;
            if !SECTIONS.contains(&kw.as_str()) {
                return Err(ModelError::syntax(sp, format!("unknown section `{kw}`")));
            }
            if !seen.insert(kw.clone()) {
                return Err(ModelError::Duplicate { span: sp, name: format!("section {kw}") });
            }
            if have_lagrangian {
                return Err(ModelError::syntax(sp, "`lagrangian` must be the last section"));
            }
            match kw.as_str() {
                "model" => match self.bump() {
                    (Tok::Str(s), _) => spec.name = s,
                    (_, sp) => return Err(ModelError::syntax(sp, "expected quoted model name")),
                },
                "indices" => {
                    self.expect(Tok::Colon)?;
                    self.list(|p| {
                        let (name, sp) = p.declared_name()?;
                        match p.bump() {
                            (Tok::Ident(k), _) if k == "in" => {}
                            (_, sp) => return Err(ModelError::syntax(sp, "expected `in`")),
                        }
                        let lo = p.small_int()?;
                        p.expect(Tok::DotDot)?;
                        let hi = p.small_int()?;
                        if hi < lo {
                            return Err(ModelError::syntax(sp, format!("empty range {lo}..{hi}")));
                        }
                        if spec.domain(&name).is_some() {
                            return Err(ModelError::Duplicate { span: sp, name });
                        }
                        spec.indices.push(IndexDomain { name, lo, hi });
                        Ok(())
                    })?;
                }
                "couplings" => {
                    self.expect(Tok::Colon)?;
                    self.list(|p| {
                        let (name, sp) = p.declared_name()?;
                        let value = if *p.peek() == Tok::Equals {
                            p.bump();
                            Some(p.signed_rational()?)
                        } else {
                            None
                        };
                        if spec.coupling(&name).is_some() || spec.coordinate(&name).is_some() {
                            return Err(ModelError::Duplicate { span: sp, name });
                        }
                        spec.couplings.push(CouplingDecl { name, value });
                        Ok(())
                    })?;
                }
                "tables" => {
                    self.expect(Tok::Colon)?;
                    self.list(|p| {
                        let (name, sp) = p.declared_name()?;
                        p.expect(Tok::Equals)?;
                        let table = p.table_body()?;
                        table.validate().map_err(|d| match d {
                            TableDefect::NotAntisymmetric(entry) => {
                                ModelError::NotAntisymmetric { name: name.clone(), entry }
                            }
                            TableDefect::Jacobi(indices) => ModelError::JacobiViolation { name: name.clone(), indices },
                            TableDefect::RankMismatch => ModelError::syntax(sp, "table entries of mixed rank"),
                        })?;
                        if spec.table(&name).is_some() {
                            return Err(ModelError::Duplicate { span: sp, name });
                        }
                        spec.tables.push(TableDecl { name, table });
                        Ok(())
                    })?;
                }
                "coordinates" => {
                    self.expect(Tok::Colon)?;
                    self.list(|p| {
                        let (name, sp) = p.declared_name()?;
                        let mut indices = Vec::new();
                        if *p.peek() == Tok::LBracket {
                            p.bump();
                            loop {
                                let (idx, isp) = p.ident()?;
                                if spec.domain(&idx).is_none() {
                                    return Err(ModelError::UndeclaredIndex { span: isp, name: idx });
                                }
                                indices.push(idx);
                                if *p.peek() == Tok::Comma {
                                    p.bump();
                                } else {
                                    break;
                                }
                            }
                            p.expect(Tok::RBracket)?;
                        }
                        if spec.coordinate(&name).is_some() || spec.coupling(&name).is_some() {
                            return Err(ModelError::Duplicate { span: sp, name });
                        }
                        spec.coordinates.push(CoordinateDecl { name, indices });
                        Ok(())
                    })?;
                }
                "lagrangian" => {
                    self.expect(Tok::Colon)?;
                    let e = self.expr()?;
                    if *self.peek() != Tok::Eof {
                        return Err(self.unexpected("operator or end of input"));
                    }
                    validate(&e, &spec, &mut Vec::new())?;
                    spec.lagrangian = e;
                    have_lagrangian = true;
                }
                _ => unreachable!(),
            }
        }
        if spec.coordinates.is_empty() {
            return Err(ModelError::syntax(self.span(), "model declares no coordinates"));
        }
        if !have_lagrangian {
            return Err(ModelError::syntax(self.span(), "missing `lagrangian` section"));
        }
        Ok(spec)
    }

    fn declared_name(&mut self) -> Result<(String, Span), ModelError> {
        let (name, sp) = self.ident()?;
        if RESERVED.contains(&name.as_str()) {
            return Err(ModelError::syntax(sp, format!("`{name}` is reserved")));
        }
        Ok((name, sp))
    }

    /// Comma-separated items until the next section keyword.
    fn list(&mut self, mut item: impl FnMut(&mut Self) -> Result<(), ModelError>) -> Result<(), ModelError> {
        if self.at_section() {
            return Ok(());
        }
        loop {
            item(self)?;
            if *self.peek() == Tok::Comma {
                self.bump();
            } else if self.at_section() {
                return Ok(());
            } else {
                return Err(self.unexpected("`,` or next section"));
            }
        }
    }

    /// `IDENT` naming a builtin table, or `{ INT+ ':' rational (',' ...)* }`.
    fn table_body(&mut self) -> Result<StructureTable, ModelError> {
        if let Tok::Ident(_) = self.peek() {
            let (name, sp) = self.ident()?;
            return StructureTable::named(&name)
                .ok_or_else(|| ModelError::syntax(sp, format!("unknown builtin table `{name}`")));
        }
        self.expect(Tok::LBrace)?;
        let mut entries = Vec::new();
        while *self.peek() != Tok::RBrace {
            let mut key = Vec::new();
            while let Tok::Number(_) = self.peek() {
                key.push(self.small_int()?);
            }
            self.expect(Tok::Colon)?;
            let v = self.signed_rational()?;
            entries.push((key, v));
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        let sp = self.expect(Tok::RBrace)?;
        StructureTable::explicit(entries).map_err(|_| ModelError::syntax(sp, "table entries of mixed rank"))
    }

    pub(crate) fn expr(&mut self) -> Result<ModelExpr, ModelError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = ModelExpr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = ModelExpr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ModelExpr, ModelError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = ModelExpr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    let sp = self.bump().1;
                    let rhs = self.unary()?;
                    if !rhs.is_constant() {
                        return Err(ModelError::Unsupported {
                            span: sp,
                            message: format!("division by non-constant `{rhs}`"),
                        });
                    }
                    lhs = match (lhs, rhs) {
                        (ModelExpr::Num(a), ModelExpr::Num(b)) => {
                            if b.is_zero() {
                                return Err(ModelError::Unsupported { span: sp, message: "division by zero".into() });
                            }
                            ModelExpr::Num(a / b)
                        }
                        (a, b) => ModelExpr::Div(Box::new(a), Box::new(b)),
                    };
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<ModelExpr, ModelError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(ModelExpr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<ModelExpr, ModelError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let sp = self.span();
        let n = i64::from(self.small_int()?);
        if neg && !base.is_constant() {
            return Err(ModelError::Unsupported { span: sp, message: format!("negative power of `{base}`") });
        }
        Ok(ModelExpr::Pow(Box::new(base), if neg { -n } else { n }))
    }

    fn atom(&mut self) -> Result<ModelExpr, ModelError> {
        match self.peek().clone() {
            Tok::Number(_) => Ok(ModelExpr::Num(self.number()?.0)),
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let span = self.bump().1;
                match name.as_str() {
                    "dot" => {
                        self.expect(Tok::LParen)?;
                        if matches!(self.peek(), Tok::Ident(s) if s == "dot") {
                            return Err(ModelError::Unsupported {
                                span: self.span(),
                                message: "nested dot(): only first-order Lagrangians are supported".into(),
                            });
                        }
                        let (name, _) = self.ident()?;
                        let indices = if *self.peek() == Tok::LBracket {
                            self.index_list(Tok::LBracket, Tok::RBracket)?
                        } else {
                            Vec::new()
                        };
                        self.expect(Tok::RParen)?;
                        Ok(ModelExpr::Dot { name, indices, span })
                    }
                    "sum" => {
                        self.expect(Tok::LParen)?;
                        let (index, _) = self.ident()?;
                        self.expect(Tok::Comma)?;
                        let body = self.expr()?;
                        self.expect(Tok::RParen)?;
                        Ok(ModelExpr::Sum { index, body: Box::new(body), span })
                    }
                    _ => match self.peek() {
                        Tok::LParen => {
                            let args = self.index_list(Tok::LParen, Tok::RParen)?;
                            Ok(ModelExpr::Table { name, args, span })
                        }
                        Tok::LBracket => {
                            let indices = self.index_list(Tok::LBracket, Tok::RBracket)?;
                            Ok(ModelExpr::Ref { name, indices, span })
                        }
                        _ => Ok(ModelExpr::Ref { name, indices: Vec::new(), span }),
                    },
                }
            }
            _ => Err(self.unexpected("expression")),
        }
    }

    fn index_list(&mut self, open: Tok, close: Tok) -> Result<Vec<IndexArg>, ModelError> {
        self.expect(open)?;
        let mut out = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Ident(s) => {
                    self.bump();
                    out.push(IndexArg::Var(s));
                }
                Tok::Number(_) => out.push(IndexArg::Lit(self.small_int()?)),
                _ => return Err(self.unexpected("index")),
            }
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(close)?;
        Ok(out)
    }

    pub(crate) fn finish(&self) -> Result<(), ModelError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }
}

fn parse_number(s: &str) -> Rational {
    match s.split_once('.') {
        None => Rational::from_integer(s.parse().expect("lexer yields digits")),
        Some((int, frac)) => {
            let digits: num_bigint::BigInt = format!("{int}{frac}").parse().expect("lexer yields digits");
            let scale = num_traits::pow(num_bigint::BigInt::from(10), frac.len());
            Rational::new(digits, scale)
        }
    }
}

fn check_index(arg: &IndexArg, span: Span, spec: &ModelSpec, bound: &[String]) -> Result<(), ModelError> {
    if let IndexArg::Var(v) = arg {
        if spec.domain(v).is_none() {
            return Err(ModelError::UndeclaredIndex { span, name: v.clone() });
        }
        if !bound.contains(v) {
            return Err(ModelError::UnboundIndex { span, name: v.clone() });
        }
    }
    Ok(())
}

fn validate(e: &ModelExpr, spec: &ModelSpec, bound: &mut Vec<String>) -> Result<(), ModelError> {
    match e {
        ModelExpr::Num(_) => Ok(()),
        ModelExpr::Ref { name, indices, span } | ModelExpr::Dot { name, indices, span } => {
            let is_dot = matches!(e, ModelExpr::Dot { .. });
            let arity = if let Some(c) = spec.coordinate(name) {
                c.indices.len()
            } else if spec.coupling(name).is_some() && !is_dot {
                0
            } else {
                return Err(ModelError::UnknownSymbol { span: *span, name: name.clone() });
            };
            if arity != indices.len() {
                return Err(ModelError::Arity {
                    span: *span,
                    name: name.clone(),
                    expected: arity,
                    found: indices.len(),
                });
            }
            indices.iter().try_for_each(|i| check_index(i, *span, spec, bound))
        }
        ModelExpr::Table { name, args, span } => {
            let table =
                spec.table(name).ok_or_else(|| ModelError::UnknownSymbol { span: *span, name: name.clone() })?;
            if table.rank() != args.len() {
                return Err(ModelError::Arity {
                    span: *span,
                    name: name.clone(),
                    expected: table.rank(),
                    found: args.len(),
                });
            }
            args.iter().try_for_each(|i| check_index(i, *span, spec, bound))
        }
        ModelExpr::Sum { index, body, span } => {
            if spec.domain(index).is_none() {
                return Err(ModelError::UndeclaredIndex { span: *span, name: index.clone() });
            }
            bound.push(index.clone());
            let r = validate(body, spec, bound);
            bound.pop();
            r
        }
        ModelExpr::Add(a, b) | ModelExpr::Sub(a, b) | ModelExpr::Mul(a, b) | ModelExpr::Div(a, b) => {
            validate(a, spec, bound)?;
            validate(b, spec, bound)
        }
        ModelExpr::Neg(a) | ModelExpr::Pow(a, _) => validate(a, spec, bound),
    }
}
