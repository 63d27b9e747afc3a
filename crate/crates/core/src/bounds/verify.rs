use super::BoundReport;
use crate::error::{Error, Result};
use crate::solver::SolutionTrace;
use serde::Serialize;

/// Log margin reported when the checked quantity is zero.
pub const MARGIN_SENTINEL: f64 = f64::MAX;

/// `int phi u^{beta1}` against `V(t)` at one recorded time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyCheck {
    pub t: f64,
    pub energy: f64,
    pub ln_bound: f64,
    /// `ln(bound/energy)`; negative on failure.
    pub log_margin: f64,
}

/// Comparison of a numerical solution with the computed bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub energy_checks: Vec<EnergyCheck>,
    /// Recorded times at or beyond the blow-up time, which cannot be checked.
    pub skipped: usize,
    pub worst_energy_log_margin: f64,
    /// Largest cell value of `u` over recorded times in `(epsilon, T]`.
    pub max_u: f64,
    pub ln_linf_bound: f64,
    pub linf_log_margin: f64,
    pub linf_certified: bool,
    pub pass: bool,
    /// What to audit when a check fails.
    pub audit: Vec<String>,
}

fn log_margin(bound_ln: f64, value: f64) -> f64 {
    if value <= 0.0 {
        MARGIN_SENTINEL
    } else {
        bound_ln - value.ln()
    }
}

/// Checks `int phi u^{beta1} <= V(t)` at every recorded time before the
/// blow-up time and `max u <= L^infinity bound` over `(epsilon, T]`.
///
/// The trace must come from the report's scenario and record `beta1`.
pub fn verify_solution_against_bounds(trace: &SolutionTrace, report: &BoundReport) -> Result<VerificationReport> {
    let book = &report.book;
    let curve = &report.curve;
    let energy = trace.energy(curve.alpha).ok_or_else(|| {
        Error::InvalidInput(format!("trace does not record int phi u^alpha for alpha = {}", curve.alpha))
    })?;
    let t_end = report.integrals.t_final;
    if let Some((t, _)) = trace.max_u.last() {
        if (t - t_end).abs() > 1e-9 * t_end {
            return Err(Error::InvalidInput(format!("trace ends at {t}, the bounds were built for T = {t_end}")));
        }
    }
    let mut checks = Vec::new();
    let mut skipped = 0;
    for (&t, &e) in energy.times.iter().zip(&energy.values) {
        if t >= curve.t_threshold {
            skipped += 1;
            continue;
        }
        let ln_v = curve.ln_v_at(t);
        checks.push(EnergyCheck { t, energy: e, ln_bound: ln_v, log_margin: log_margin(ln_v, e) });
    }
    let worst = checks.iter().map(|c| c.log_margin).fold(MARGIN_SENTINEL, f64::min);

    let (epsilon, certified) = match &report.linfty {
        Some(l) => (l.epsilon, l.certified),
        None => (0.0, false),
    };
    let max_u = trace
        .max_u
        .times
        .iter()
        .zip(&trace.max_u.values)
        .filter(|(t, _)| **t > epsilon)
        .map(|(_, v)| *v)
        .fold(0.0, f64::max);
    let ln_linf = report.ln_linf();
    let linf_margin = log_margin(ln_linf, max_u);

    let energy_ok = worst >= 0.0;
    let linf_ok = linf_margin >= 0.0;
    let mut audit = Vec::new();
    if !energy_ok {
        audit.push(format!(
            "weighted bound exceeded (worst log margin {worst:e}): audit the embedding constants c1..c7, the weight \
             integrals K1..K6 at alpha = {}, and the solver resolution",
            book.alpha
        ));
    }
    if !linf_ok {
        audit.push(format!(
            "L-infinity bound exceeded (log margin {linf_margin:e}): audit N1, N2, Psi_T, the iteration products and \
             c7..c11"
        ));
    }
    if !certified {
        audit.push("T is not below the blow-up time, so the L-infinity bound is not certified".into());
    }
    Ok(VerificationReport {
        energy_checks: checks,
        skipped,
        worst_energy_log_margin: worst,
        max_u,
        ln_linf_bound: ln_linf,
        linf_log_margin: linf_margin,
        linf_certified: certified,
        pass: energy_ok && linf_ok && certified,
        audit,
    })
}
