use std::collections::{BTreeMap, HashMap};

use num_traits::{Float, ToPrimitive};
use serde::Serialize;

use crate::engine::{HamiltonianSet, TotalDifferentialSystem};
use crate::symcore::{Symbol, SymbolKind};
use crate::{Expr, Rational};

/// Positions of the symbols an evaluation environment provides.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    symbols: Vec<Symbol>,
    index: HashMap<Symbol, usize>,
}

impl Layout {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        let index = symbols.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Layout { symbols, index }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn position(&self, s: &Symbol) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// A polynomial flattened to `Σ c · Π env[i]^k` over a fixed layout.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledExpr<F> {
    terms: Vec<(F, Vec<(usize, i32)>)>,
}

pub fn to_float<F: Float>(r: &Rational) -> F {
    let v = r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN);
    F::from(v).unwrap_or_else(F::nan)
}

impl<F: Float> CompiledExpr<F> {
    /// Fails with the first symbol the layout does not provide.
    pub fn compile(e: &Expr, layout: &Layout) -> Result<Self, Symbol> {
        let mut terms = Vec::with_capacity(e.len());
        for (m, c) in e.terms() {
            let mut factors = Vec::with_capacity(m.factors().len());
            for (s, k) in m.factors() {
                let i = layout.position(s).ok_or_else(|| s.clone())?;
                factors.push((i, *k as i32));
            }
            terms.push((to_float(c), factors));
        }
        Ok(CompiledExpr { terms })
    }

    pub fn eval(&self, env: &[F]) -> F {
        let mut acc = F::zero();
        for (c, factors) in &self.terms {
            let mut t = *c;
            for &(i, k) in factors {
                t = t * if k == 1 { env[i] } else { env[i].powi(k) };
            }
            acc = acc + t;
        }
        acc
    }
}

/// Values of every canonical coordinate and momentum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericState<F> {
    pub symbols: Vec<Symbol>,
    pub values: Vec<F>,
}

impl<F: Float> NumericState<F> {
    pub fn get(&self, s: &Symbol) -> Option<F> {
        self.symbols.iter().position(|x| x == s).map(|i| self.values[i])
    }

    pub fn set(&mut self, s: &Symbol, v: F) {
        if let Some(i) = self.symbols.iter().position(|x| x == s) {
            self.values[i] = v;
        }
    }
}

/// Prescribed `t_μ(t)` for one non-time parameter.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParameterPath {
    pub parameter: Symbol,
    pub path: Expr,
}

impl ParameterPath {
    pub fn constant_zero(parameter: Symbol) -> Self {
        ParameterPath { parameter, path: Expr::zero() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory<F> {
    pub symbols: Vec<Symbol>,
    pub dt: F,
    pub times: Vec<F>,
    pub states: Vec<Vec<F>>,
    pub paths: Vec<ParameterPath>,
    /// Set when a non-finite value stopped the integration.
    pub aborted: Option<String>,
}

impl<F: Float> Trajectory<F> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> NumericState<F> {
        NumericState { symbols: self.symbols.clone(), values: self.states[k].clone() }
    }

    pub fn last(&self) -> NumericState<F> {
        self.state(self.len() - 1)
    }
}

/// The total differential system with couplings fixed and the parameter
/// momenta replaced by their constraint values, compiled over the layout
/// `[canonical state…, parameters…, t]`.
#[derive(Clone, Debug)]
pub struct NumericSystem<F> {
    pub state_symbols: Vec<Symbol>,
    pub parameters: Vec<Symbol>,
    layout: Layout,
    substitutions: BTreeMap<Symbol, Expr>,
    /// `rates[x][α]`
    rates: Vec<Vec<CompiledExpr<F>>>,
    h0: CompiledExpr<F>,
}

impl<F: Float> NumericSystem<F> {
    /// Couplings without a value in `couplings` are set to 1.
    pub fn new(hset: &HamiltonianSet, flow: &TotalDifferentialSystem, couplings: &BTreeMap<Symbol, Rational>) -> Self {
        let state_symbols: Vec<Symbol> =
            hset.signature.pairs().iter().flat_map(|(q, p)| [q.clone(), p.clone()]).collect();
        let parameters: Vec<Symbol> = hset.signature.parameters().iter().skip(1).cloned().collect();
        let mut symbols = state_symbols.clone();
        symbols.extend(parameters.iter().cloned());
        symbols.push(Symbol::time());
        let layout = Layout::new(symbols);

        let mut substitutions = BTreeMap::new();
        for g in hset.generators.iter().skip(1) {
            let p = g.parameter.momentum();
            substitutions.insert(p.clone(), Expr::symbol(p) - &g.expr);
        }
        let mut all_couplings = BTreeMap::new();
        for e in hset.generators.iter().map(|g| &g.expr) {
            for s in e.symbols() {
                if s.kind() == SymbolKind::Coupling {
                    let v = couplings.get(&s).cloned().unwrap_or_else(|| Rational::from_integer(1.into()));
                    all_couplings.insert(s, Expr::constant(v));
                }
            }
        }
        // couplings may hide inside φ_μ as well
        let substitutions: BTreeMap<Symbol, Expr> =
            substitutions.into_iter().map(|(k, v)| (k, v.substitute(&all_couplings))).collect();
        let substitutions: BTreeMap<Symbol, Expr> = substitutions.into_iter().chain(all_couplings).collect();

        let mut system = NumericSystem {
            state_symbols,
            parameters,
            layout,
            substitutions,
            rates: Vec::new(),
            h0: CompiledExpr { terms: Vec::new() },
        };
        system.rates = system
            .state_symbols
            .iter()
            .map(|x| {
                let row = flow.row(x).expect("flow row for every canonical variable");
                row.coefficients.iter().map(|c| system.compile(c).expect("flow over canonical layout")).collect()
            })
            .collect();
        system.h0 = system.compile(&hset.h0).expect("H0 over canonical layout");
        system
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Rewrites parameter momenta and couplings, then compiles. Fails on a
    /// symbol outside `[state, parameters, t]`.
    pub fn compile(&self, e: &Expr) -> Result<CompiledExpr<F>, Symbol> {
        CompiledExpr::compile(&self.prepare(e), &self.layout)
    }

    pub fn prepare(&self, e: &Expr) -> Expr {
        e.substitute(&self.substitutions)
    }

    pub fn zero_state(&self) -> NumericState<F> {
        NumericState { symbols: self.state_symbols.clone(), values: vec![F::zero(); self.state_symbols.len()] }
    }

    pub fn energy(&self, env: &[F]) -> F {
        self.h0.eval(env)
    }

    /// `[state, t_μ(t), t]`
    pub fn environment(&self, state: &[F], paths: &CompiledPaths<F>, t: F) -> Vec<F> {
        let mut env = Vec::with_capacity(self.layout.len());
        env.extend_from_slice(state);
        env.extend(paths.values(t));
        env.push(t);
        env
    }

    fn derivative(&self, state: &[F], paths: &CompiledPaths<F>, t: F, out: &mut [F]) {
        let env = self.environment(state, paths, t);
        let rates = paths.rates(t);
        for (x, row) in self.rates.iter().enumerate() {
            let mut acc = row[0].eval(&env);
            for (k, c) in row.iter().enumerate().skip(1) {
                if rates[k - 1] != F::zero() {
                    acc = acc + c.eval(&env) * rates[k - 1];
                }
            }
            out[x] = acc;
        }
    }

    /// Paths for every parameter, defaulting to the constant 0.
    pub fn compile_paths(&self, given: &[ParameterPath]) -> Result<CompiledPaths<F>, String> {
        let t_only = Layout::new(vec![Symbol::time()]);
        let mut paths = Vec::new();
        let mut out = Vec::new();
        for p in &self.parameters {
            let path = given
                .iter()
                .find(|g| &g.parameter == p)
                .cloned()
                .unwrap_or_else(|| ParameterPath::constant_zero(p.clone()));
            let e = self.prepare(&path.path);
            let value = CompiledExpr::compile(&e, &t_only).map_err(|s| format!("path for {p} mentions {s}"))?;
            let rate = CompiledExpr::compile(&e.diff(&Symbol::time()), &t_only).expect("derivative of a t-path");
            out.push((value, rate));
            paths.push(path);
        }
        if let Some(g) = given.iter().find(|g| !self.parameters.contains(&g.parameter)) {
            return Err(format!("{} is not a parameter of this model", g.parameter));
        }
        Ok(CompiledPaths { paths, compiled: out })
    }
}

#[derive(Clone, Debug)]
pub struct CompiledPaths<F> {
    pub paths: Vec<ParameterPath>,
    compiled: Vec<(CompiledExpr<F>, CompiledExpr<F>)>,
}

impl<F: Float> CompiledPaths<F> {
    pub fn values(&self, t: F) -> impl Iterator<Item = F> + '_ {
        self.compiled.iter().map(move |(v, _)| v.eval(&[t]))
    }

    pub fn rates(&self, t: F) -> Vec<F> {
        self.compiled.iter().map(|(_, r)| r.eval(&[t])).collect()
    }
}

/// Classic fourth-order Runge–Kutta on `dx/dt = Σ_α c_α(x) dt_α/dt`.
pub fn integrate_flow<F: Float>(
    system: &NumericSystem<F>,
    init: &NumericState<F>,
    paths: &CompiledPaths<F>,
    dt: F,
    t_end: F,
) -> Trajectory<F> {
    assert!(dt > F::zero() && t_end > F::zero(), "dt and t_end must be positive");
    let steps = (t_end / dt).round().to_usize().unwrap_or(0).max(1);
    let n = init.values.len();
    let two = F::one() + F::one();
    let six = two + two + two;
    let half = dt / two;

    let mut traj = Trajectory {
        symbols: init.symbols.clone(),
        dt,
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        paths: paths.paths.clone(),
        aborted: None,
    };
    let mut x = init.values.clone();
    traj.times.push(F::zero());
    traj.states.push(x.clone());
    let (mut k1, mut k2, mut k3, mut k4) =
        (vec![F::zero(); n], vec![F::zero(); n], vec![F::zero(); n], vec![F::zero(); n]);
    let mut tmp = vec![F::zero(); n];
    // Kahan compensation for the state update
    let mut carry = vec![F::zero(); n];
    for step in 0..steps {
        let t = dt * F::from(step).unwrap();
        system.derivative(&x, paths, t, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + half * k1[i];
        }
        system.derivative(&tmp, paths, t + half, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + half * k2[i];
        }
        system.derivative(&tmp, paths, t + half, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + dt * k3[i];
        }
        system.derivative(&tmp, paths, t + dt, &mut k4);
        for i in 0..n {
            let inc = dt / six * (k1[i] + two * k2[i] + two * k3[i] + k4[i]) - carry[i];
            let next = x[i] + inc;
            carry[i] = (next - x[i]) - inc;
            x[i] = next;
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            traj.aborted = Some(format!(
                "non-finite value for {} at t = {}",
                traj.symbols[i],
                (t + dt).to_f64().unwrap_or(f64::NAN)
            ));
            break;
        }
        traj.times.push(dt * F::from(step + 1).unwrap());
        traj.states.push(x.clone());
    }
    traj
}
