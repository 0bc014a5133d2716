//! End-to-end orchestration and the JSON report.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::action::{
    canonical_action, faddeev_measure, path_integral_report, CanonicalAction, GaugeMeasureReport, MeasureError,
    PathIntegralReport,
};
use crate::engine::{
    build_h0, build_hjpde, classify, derive_flow, involution_residuals, legendre, run_chain, ConstraintChain,
    EngineError, HamiltonianSet, LegendreResult, TotalDifferentialSystem,
};
use crate::frontend::FlatModel;
use crate::symcore::Symbol;
use crate::verify::{
    compare_chains, dirac_oracle, drift_with_halving, gauss_surface_state, integrability_probe, on_surface_state,
    ChainComparison, DriftReport, NumericState, NumericSystem, ParameterPath, ProbeReport, SurfaceProjector, Verdict,
    DRIFT_TOLERANCE, PROBE_TOLERANCE,
};
use crate::{Expr, Rational};

#[derive(Clone, Debug)]
pub struct Analysis {
    pub model: FlatModel,
    /// Pretty-printed model source, when the model came from one.
    pub source: Option<String>,
    pub legendre: LegendreResult,
    pub hamiltonians: HamiltonianSet,
    pub flow: TotalDifferentialSystem,
    pub chain: ConstraintChain,
    pub action: CanonicalAction,
    pub path_integral: PathIntegralReport,
    /// `{H′_α, H′_β}` left nonzero modulo the chain.
    pub involution: Vec<(usize, usize, Expr)>,
}

/// legendre → H₀ → HJPDE → flow → chain → classify → action → report.
pub fn analyze(model: FlatModel, max_generations: usize) -> Result<Analysis, EngineError> {
    let leg = legendre(&model)?;
    let h0 = build_h0(&leg, &model)?;
    let hset = build_hjpde(&leg, &h0);
    let flow = derive_flow(&hset);
    let chain = classify(&run_chain(&hset, max_generations), &hset);
    let action = canonical_action(&hset, &flow);
    let path_integral = path_integral_report(&action, &chain, &hset);
    let involution = involution_residuals(&hset, &chain);
    Ok(Analysis {
        model,
        source: None,
        legendre: leg,
        hamiltonians: hset,
        flow,
        chain,
        action,
        path_integral,
        involution,
    })
}

impl Analysis {
    /// Values for every coupling still symbolic: `overrides` first, then 1.
    pub fn coupling_values(&self, overrides: &BTreeMap<Symbol, Rational>) -> BTreeMap<Symbol, Rational> {
        self.model
            .free_couplings()
            .into_iter()
            .map(|c| {
                let v = overrides.get(&c).cloned().unwrap_or_else(|| Rational::from_integer(1.into()));
                (c, v)
            })
            .collect()
    }

    pub fn numeric_system(&self, overrides: &BTreeMap<Symbol, Rational>) -> NumericSystem<f64> {
        NumericSystem::new(&self.hamiltonians, &self.flow, &self.coupling_values(overrides))
    }

    pub fn measure(&self, gauges: &[Expr]) -> Result<GaugeMeasureReport, MeasureError> {
        faddeev_measure(&self.chain, gauges, &self.hamiltonians.extended_signature())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub dt: f64,
    pub t_end: f64,
    pub seed: u64,
    pub samples: usize,
    pub paths: Vec<ParameterPath>,
    pub couplings: BTreeMap<Symbol, Rational>,
    pub drift_tolerance: f64,
    pub probe_tolerance: f64,
    /// Scale of the random initial data.
    pub amplitude: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            dt: 1e-3,
            t_end: 10.0,
            seed: 7,
            samples: 100,
            paths: Vec::new(),
            couplings: BTreeMap::new(),
            drift_tolerance: DRIFT_TOLERANCE,
            probe_tolerance: PROBE_TOLERANCE,
            amplitude: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub initial: NumericState<f64>,
    pub paths: Vec<ParameterPath>,
    pub drift: DriftReport,
    pub probe: ProbeReport,
    pub oracle_chain: Vec<Expr>,
    pub oracle: ChainComparison,
    pub drift_tolerance: f64,
    pub probe_tolerance: f64,
    /// Every exceeded tolerance or failed check; empty means pass.
    pub breaches: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.breaches.is_empty()
    }
}

/// On-surface initial data: the color-aligned Gauss construction when it
/// applies, otherwise a projected random point.
pub fn initial_state(
    analysis: &Analysis,
    system: &NumericSystem<f64>,
    seed: u64,
    amplitude: f64,
) -> Option<NumericState<f64>> {
    let gauss: NumericState<f64> = gauss_surface_state(system, seed, amplitude);
    if gauss.values.iter().any(|v| *v != 0.0) {
        let projector = SurfaceProjector::new(system, &analysis.chain);
        let mut env = gauss.values.clone();
        env.extend(std::iter::repeat(0.0).take(system.layout().len() - env.len()));
        if projector.residual(&env) <= 1e-14 {
            return Some(gauss);
        }
    }
    on_surface_state(system, &analysis.chain, seed, amplitude)
}

#[derive(Debug, Clone, PartialEq)]
pub enum VerifyError {
    Path(String),
    NoInitialState,
    Oracle(EngineError),
}

impl std::fmt::Display for VerifyError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VerifyError::Path(m) => write!(f, "bad parameter path: {m}"),
            VerifyError::NoInitialState => write!(f, "could not place initial data on the constraint surface"),
            VerifyError::Oracle(e) => write!(f, "oracle failed: {e}"),
        }
    }
}

impl std::error::Error for VerifyError {}

pub fn verify(analysis: &Analysis, opts: &VerifyOptions) -> Result<VerifyReport, VerifyError> {
    let system = analysis.numeric_system(&opts.couplings);
    let paths = system.compile_paths(&opts.paths).map_err(VerifyError::Path)?;
    let init = initial_state(analysis, &system, opts.seed, opts.amplitude).ok_or(VerifyError::NoInitialState)?;
    let drift = drift_with_halving(&system, &analysis.chain, &init, &paths, opts.dt, opts.t_end);
    let probe = integrability_probe(&analysis.hamiltonians, &analysis.chain, &system, opts.samples, opts.seed);
    let oracle = dirac_oracle(&analysis.model).map_err(VerifyError::Oracle)?;
    let oracle_chain = oracle.expressions();
    let comparison = compare_chains(&analysis.chain.expressions(), &oracle_chain);

    let mut breaches = Vec::new();
    if let Some(a) = &drift.aborted {
        breaches.push(format!("integration aborted: {a}"));
    }
    if !(drift.max_constraint <= opts.drift_tolerance) {
        breaches.push(format!("constraint drift {:.3e} exceeds {:.1e}", drift.max_constraint, opts.drift_tolerance));
    }
    if !(drift.energy_drift <= opts.drift_tolerance) {
        breaches.push(format!("energy drift {:.3e} exceeds {:.1e}", drift.energy_drift, opts.drift_tolerance));
    }
    if analysis.chain.is_closed() && !(probe.max_residual <= opts.probe_tolerance) {
        breaches.push(format!("probe residual {:.3e} exceeds {:.1e}", probe.max_residual, opts.probe_tolerance));
    }
    if probe.accepted == 0 && opts.samples > 0 {
        breaches.push("probe found no on-surface samples".to_string());
    }
    if comparison.verdict != Verdict::Equivalent {
        breaches.push("engine and Dirac-Bergmann chains differ".to_string());
    }
    Ok(VerifyReport {
        initial: init,
        paths: paths.paths.clone(),
        drift,
        probe,
        oracle_chain,
        oracle: comparison,
        drift_tolerance: opts.drift_tolerance,
        probe_tolerance: opts.probe_tolerance,
        breaches,
    })
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn measure_value(m: &Result<GaugeMeasureReport, MeasureError>) -> Value {
    match m {
        Ok(r) => json!({ "status": "OK", "report": to_value(r) }),
        Err(e) => json!({ "status": "REFUSED", "reason": e.to_string() }),
    }
}

/// Report body without `meta`; this is what the content hash covers.
pub fn report_body(
    analysis: &Analysis,
    measure: Option<&Result<GaugeMeasureReport, MeasureError>>,
    verify: Option<&VerifyReport>,
) -> Value {
    let chain = &analysis.chain;
    let mut model = to_value(&analysis.model);
    if let Some(src) = &analysis.source {
        model["source"] = Value::String(src.clone());
    }
    json!({
        "model": model,
        "legendre": to_value(&analysis.legendre),
        "hamiltonians": {
            "h0": to_value(&analysis.hamiltonians.h0),
            "generators": to_value(&analysis.hamiltonians.generators),
            "signature": to_value(&analysis.hamiltonians.signature),
            "flow": to_value(&analysis.flow),
        },
        "chain": {
            "status": to_value(&chain.closure),
            "generations": chain.generations,
            "first_class": chain.first_class_count(),
            "second_class": chain.second_class().len(),
            "constraints": to_value(&chain.constraints),
            "certificates": to_value(&chain.certificates),
            "parameter_relations": to_value(&chain.parameter_relations),
            "bracket_matrix": to_value(&chain.bracket_matrix),
            "involution_residuals": analysis.involution.iter().map(|(a, b, e)| json!({"pair": [a, b], "residual": to_value(e)})).collect::<Vec<_>>(),
            "warnings": to_value(&chain.warnings),
        },
        "action": to_value(&analysis.action),
        "path_integral": to_value(&analysis.path_integral),
        "measure": measure.map(measure_value).unwrap_or(Value::Null),
        "verify": verify.map(to_value).unwrap_or(Value::Null),
    })
}

pub fn content_hash(body: &Value) -> String {
    let bytes = serde_json::to_vec(body).expect("json");
    let digest = Sha256::digest(&bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Full report: body plus `meta` with version, content hash and timestamp.
pub fn report_json(
    analysis: &Analysis,
    measure: Option<&Result<GaugeMeasureReport, MeasureError>>,
    verify: Option<&VerifyReport>,
    timestamp: u64,
) -> Value {
    let mut body = report_body(analysis, measure, verify);
    let hash = content_hash(&body);
    body["meta"] = json!({
        "tool": "hjq",
        "version": env!("CARGO_PKG_VERSION"),
        "content_hash": hash,
        "timestamp": timestamp,
    });
    body
}
