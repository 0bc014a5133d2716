use std::collections::BTreeMap;

use super::ast::ModelSpec;
use super::{parse_model, ModelError};
use crate::Rational;

struct Builtin {
    name: &'static str,
    source: &'static str,
    required: &'static [&'static str],
}

const BUILTINS: [Builtin; 4] = [
    Builtin {
        name: "yang-mills-su2-homogeneous",
        source: include_str!("../../models/yang-mills-su2-homogeneous.hjm"),
        required: &[],
    },
    Builtin { name: "free-particle", source: include_str!("../../models/free-particle.hjm"), required: &[] },
    Builtin { name: "toy-singular", source: include_str!("../../models/toy-singular.hjm"), required: &[] },
    Builtin { name: "proca-homogeneous", source: include_str!("../../models/proca-homogeneous.hjm"), required: &["m"] },
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|b| b.name).collect()
}

pub fn builtin_source(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|b| b.name == name).map(|b| b.source)
}

/// Builtin model with coupling values taken from `params`. Couplings not
/// mentioned stay symbolic unless the model requires a value.
pub fn builtin_model(name: &str, params: &BTreeMap<String, Rational>) -> Result<ModelSpec, ModelError> {
    let b = BUILTINS.iter().find(|b| b.name == name).ok_or_else(|| ModelError::UnknownModel(name.to_string()))?;
    let mut spec = parse_model(b.source)?;
    for (k, v) in params {
        let c = spec
            .couplings
            .iter_mut()
            .find(|c| &c.name == k)
            .ok_or_else(|| ModelError::UnknownParameter { model: name.to_string(), name: k.clone() })?;
        c.value = Some(v.clone());
    }
    for req in b.required {
        if spec.coupling(req).and_then(|c| c.value.as_ref()).is_none() {
            return Err(ModelError::MissingCoupling { model: name.to_string(), name: req.to_string() });
        }
    }
    Ok(spec)
}
