use num_traits::Float;
use serde::Serialize;

use super::numeric::{integrate_flow, CompiledPaths, NumericState, NumericSystem, Trajectory};
use crate::engine::ConstraintChain;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintMaximum {
    pub constraint: String,
    pub max_abs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HalvingEstimate {
    pub dt: f64,
    pub constraint_drift: f64,
    pub energy_drift: f64,
    /// Step-halving reduction factor of the metric named in `metric`.
    pub ratio: f64,
    pub order: f64,
    pub metric: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriftReport {
    pub dt: f64,
    pub t_end: f64,
    pub samples: usize,
    pub constraints: Vec<ConstraintMaximum>,
    pub max_constraint: f64,
    /// `max |H₀(t) − H₀(0)| / |H₀(0)|`, absolute when `|H₀(0)| < 1e-12`.
    pub energy_drift: f64,
    pub energy_relative: bool,
    pub halving: Option<HalvingEstimate>,
    pub aborted: Option<String>,
}

/// Evaluates every chain constraint and `H₀` along the trajectory.
pub fn constraint_drift<F: Float>(
    traj: &Trajectory<F>,
    chain: &ConstraintChain,
    system: &NumericSystem<F>,
    paths: &CompiledPaths<F>,
) -> DriftReport {
    assert!(!traj.is_empty(), "empty trajectory");
    let compiled: Vec<_> = chain
        .constraints
        .iter()
        .map(|c| system.compile(&c.expression).expect("constraint over the numeric layout"))
        .collect();
    let mut maxima = vec![0.0f64; compiled.len()];
    let env0 = system.environment(&traj.states[0], paths, traj.times[0]);
    let e0 = system.energy(&env0).to_f64().unwrap_or(f64::NAN);
    let mut energy_dev = 0.0f64;
    for (t, x) in traj.times.iter().zip(&traj.states) {
        let env = system.environment(x, paths, *t);
        for (m, c) in maxima.iter_mut().zip(&compiled) {
            *m = m.max(c.eval(&env).to_f64().unwrap_or(f64::NAN).abs());
        }
        energy_dev = energy_dev.max((system.energy(&env).to_f64().unwrap_or(f64::NAN) - e0).abs());
    }
    let energy_relative = e0.abs() >= 1e-12;
    let energy_drift = if energy_relative { energy_dev / e0.abs() } else { energy_dev };
    DriftReport {
        dt: traj.dt.to_f64().unwrap_or(f64::NAN),
        t_end: traj.times.last().and_then(|t| t.to_f64()).unwrap_or(0.0),
        samples: traj.len(),
        max_constraint: maxima.iter().cloned().fold(0.0, f64::max),
        constraints: chain
            .constraints
            .iter()
            .zip(maxima)
            .map(|(c, m)| ConstraintMaximum { constraint: c.expression.to_string(), max_abs: m })
            .collect(),
        energy_drift,
        energy_relative,
        halving: None,
        aborted: traj.aborted.clone(),
    }
}

/// Runs at `dt`, `dt/2` and `dt/4`. The drifts at `dt/2` are recorded;
/// the ratio is the self-convergence factor of the final state,
/// `|x(dt) − x(dt/2)| / |x(dt/2) − x(dt/4)|`, nominally 16 for RK4.
pub fn drift_with_halving<F: Float>(
    system: &NumericSystem<F>,
    chain: &ConstraintChain,
    init: &NumericState<F>,
    paths: &CompiledPaths<F>,
    dt: F,
    t_end: F,
) -> DriftReport {
    let two = F::one() + F::one();
    let traj = integrate_flow(system, init, paths, dt, t_end);
    let mut report = constraint_drift(&traj, chain, system, paths);
    if report.aborted.is_some() {
        return report;
    }
    let half = integrate_flow(system, init, paths, dt / two, t_end);
    let quarter = integrate_flow(system, init, paths, dt / two / two, t_end);
    let half_report = constraint_drift(&half, chain, system, paths);
    let distance = |a: &Trajectory<F>, b: &Trajectory<F>| {
        a.last()
            .values
            .iter()
            .zip(&b.last().values)
            .map(|(x, y)| (*x - *y).abs().to_f64().unwrap_or(f64::NAN))
            .fold(0.0, f64::max)
    };
    let coarse = distance(&traj, &half);
    let fine = distance(&half, &quarter);
    let ratio = if fine > 0.0 { coarse / fine } else { f64::INFINITY };
    report.halving = Some(HalvingEstimate {
        dt: half_report.dt,
        constraint_drift: half_report.max_constraint,
        energy_drift: half_report.energy_drift,
        ratio,
        order: ratio.log2(),
        metric: "trajectory".to_string(),
    });
    report
}
