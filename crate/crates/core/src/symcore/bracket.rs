use std::collections::BTreeSet;

use serde::Serialize;

use super::{Coeff, Poly, SymError, Symbol};

/// Partition of phase space into conjugate pairs `(q_a, p_a)` and the
/// parameters `t_α` (time and the coordinates promoted to parameters).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhaseSpaceSignature {
    pairs: Vec<(Symbol, Symbol)>,
    parameters: Vec<Symbol>,
}

impl PhaseSpaceSignature {
    pub fn new(pairs: Vec<(Symbol, Symbol)>, parameters: Vec<Symbol>) -> Result<Self, SymError> {
        let mut seen = BTreeSet::new();
        for s in pairs.iter().flat_map(|(q, p)| [q, p]).chain(parameters.iter()) {
            if !seen.insert(s.clone()) {
                return Err(SymError::Signature(format!("symbol `{s}` listed twice")));
            }
        }
        Ok(PhaseSpaceSignature { pairs, parameters })
    }

    /// Signature over the given coordinates with their conjugate momenta.
    pub fn canonical(coordinates: &[Symbol]) -> Self {
        PhaseSpaceSignature {
            pairs: coordinates.iter().map(|q| (q.clone(), q.momentum())).collect(),
            parameters: Vec::new(),
        }
    }

    pub fn pairs(&self) -> &[(Symbol, Symbol)] {
        &self.pairs
    }

    pub fn parameters(&self) -> &[Symbol] {
        &self.parameters
    }

    /// Every parameter paired with its own momentum and appended to the
    /// conjugate list. Variations along the parameters `t_α` need the
    /// brackets on this enlarged space.
    pub fn extended(&self) -> Self {
        let mut pairs = self.pairs.clone();
        pairs.extend(self.parameters.iter().map(|t| (t.clone(), t.momentum())));
        PhaseSpaceSignature { pairs, parameters: Vec::new() }
    }
}

/// `{f, g} = Σ_a (∂f/∂q_a ∂g/∂p_a − ∂f/∂p_a ∂g/∂q_a)` over the pairs of
/// `sig`. Parameters have vanishing brackets with everything.
pub fn poisson_bracket<C: Coeff>(f: &Poly<C>, g: &Poly<C>, sig: &PhaseSpaceSignature) -> Poly<C> {
    let mut acc = Poly::zero();
    for (q, p) in &sig.pairs {
        if !(f.contains(q) || f.contains(p)) || !(g.contains(q) || g.contains(p)) {
            continue;
        }
        acc = acc + f.diff(q) * g.diff(p) - f.diff(p) * g.diff(q);
    }
    acc
}
