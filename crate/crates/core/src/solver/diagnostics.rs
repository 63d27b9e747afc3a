use super::scenario::Scenario;
use super::trace::SolutionTrace;
use crate::error::{Error, Result};
use crate::grid::TimeSeries;
use serde::Serialize;

/// Relative tolerance of the discrete mass identity without a source.
pub const MASS_IDENTITY_TOL: f64 = 1e-10;
/// Relative tolerance of the mass identity with a manufactured source.
pub const SOURCE_IDENTITY_TOL: f64 = 1e-9;
/// Relative slack allowed on increases of `int phi u^alpha`.
pub const MONOTONICITY_SLACK: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClampEvent {
    pub t: f64,
    pub cells: usize,
    pub mass: f64,
}

/// Per-step check of `d/dt int phi u^lambda + int_Gamma psi u^lambda = int s`.
#[derive(Clone, Debug)]
pub struct MassBalanceReport {
    /// `[m(t_{k+1}) - m(t_k)] / dt + outflow(t_{k+1})`, stamped at `t_{k+1}`.
    pub residual: TimeSeries,
    /// Residual minus the source integral and the mass added by clamping, per unit time.
    pub defect: TimeSeries,
    /// Largest `|defect| / (1 + |terms|)`.
    pub worst_relative_defect: f64,
    pub tolerance: f64,
    pub clamp_events: Vec<ClampEvent>,
}

impl MassBalanceReport {
    pub fn passes(&self) -> bool {
        self.worst_relative_defect <= self.tolerance
    }
}

pub fn mass_balance_report(trace: &SolutionTrace, scenario: &Scenario) -> Result<MassBalanceReport> {
    let tolerance = if scenario.source.is_some() { SOURCE_IDENTITY_TOL } else { MASS_IDENTITY_TOL };
    let mut residual = TimeSeries::new();
    let mut defect = TimeSeries::new();
    let mut worst: f64 = 0.0;
    let mut clamp_events = Vec::new();
    for s in &trace.steps {
        let rate = s.mass_change / s.dt;
        let r = rate + s.outflow;
        let d = r - s.source - s.clamped_mass / s.dt;
        let t = s.t + s.dt;
        residual.push(t, r)?;
        defect.push(t, d)?;
        worst = worst.max(d.abs() / (1.0 + rate.abs() + s.outflow.abs() + s.source.abs()));
        if s.clamped_cells > 0 {
            clamp_events.push(ClampEvent { t, cells: s.clamped_cells, mass: s.clamped_mass });
        }
    }
    Ok(MassBalanceReport { residual, defect, worst_relative_defect: worst, tolerance, clamp_events })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub alpha: f64,
    /// Largest relative increase `(E_{k+1} - E_k) / E_k`; nonpositive when monotone.
    pub worst_violation: f64,
    pub worst_time: Option<f64>,
    pub compared: usize,
}

impl MonotonicityReport {
    pub fn passes(&self) -> bool {
        self.worst_violation <= MONOTONICITY_SLACK
    }
}

/// Checks that `int phi u^alpha` never increases between recorded steps.
///
/// Only meaningful for pure outflow (`psi >= 0`) without gravity; other
/// scenarios are rejected.
pub fn monotonicity_check(trace: &SolutionTrace, scenario: &Scenario, alpha: f64) -> Result<MonotonicityReport> {
    if !scenario.has_outflow_only() {
        return Err(Error::InvalidInput("monotonicity needs psi >= 0 everywhere".into()));
    }
    if scenario.z.c_z != 0.0 {
        return Err(Error::InvalidInput("monotonicity needs C_Z = 0".into()));
    }
    let series = trace
        .energy(alpha)
        .ok_or_else(|| Error::InvalidInput(format!("alpha = {alpha} was not recorded by the solver")))?;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_time = None;
    for k in 1..series.len() {
        let (prev, cur) = (series.values[k - 1], series.values[k]);
        let v = (cur - prev) / prev.abs().max(f64::MIN_POSITIVE);
        if v > worst {
            worst = v;
            worst_time = Some(series.times[k]);
        }
    }
    if series.len() < 2 {
        worst = 0.0;
    }
    Ok(MonotonicityReport { alpha, worst_violation: worst, worst_time, compared: series.len().saturating_sub(1) })
}
