use super::calibrate::EmbeddingConstants;
use super::params::{d1, d2, SobolevParams, TraceBranch};
use crate::error::{Error, Result};
use crate::grid::{grad_energy, log_weight_integral, SpatialField};
use crate::logspace::{log_sum_exp, LogScalar};
use serde::Serialize;

/// Relative slack allowed before a check is declared failed.
pub const PASS_SLACK: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CheckKind {
    WeightedSobolev,
    TraceOneWeight,
    TraceTwoWeight,
    ParabolicSobolev,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::WeightedSobolev => "weighted_sobolev",
            CheckKind::TraceOneWeight => "trace_one_weight",
            CheckKind::TraceTwoWeight => "trace_two_weight",
            CheckKind::ParabolicSobolev => "parabolic_sobolev",
        }
    }
}

/// Both sides of one inequality evaluation, with the right-hand side split by term.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub kind: CheckKind,
    pub lhs: LogScalar,
    pub rhs: LogScalar,
    pub terms: Vec<(String, LogScalar)>,
    pub branch: Option<TraceBranch>,
    /// The energy integrand was floored somewhere (`u = 0` under a negative power).
    pub degenerate: bool,
}

impl CheckOutcome {
    fn assemble(kind: CheckKind, lhs: LogScalar, terms: Vec<(String, LogScalar)>) -> Self {
        let rhs = LogScalar::sum(terms.iter().map(|t| t.1));
        CheckOutcome { kind, lhs, rhs, terms, branch: None, degenerate: false }
    }

    /// `rhs - lhs` (may be infinite when the right side overflows).
    pub fn margin(&self) -> f64 {
        let (l, r) = (self.lhs.value(), self.rhs.value());
        if r.is_infinite() && l.is_finite() {
            return f64::INFINITY;
        }
        r - l
    }

    /// `margin >= -PASS_SLACK |rhs|`, decided in log space.
    pub fn passes(&self) -> bool {
        self.lhs.ln() <= self.rhs.ln() + PASS_SLACK.ln_1p()
    }
}

fn abs_field(u: &SpatialField) -> Result<SpatialField> {
    u.map(format!("|{}|", u.label()), f64::abs)
}

/// `int_Gamma |u|^q dS` with boundary values taken from the adjacent cells.
fn log_boundary_power(u: &SpatialField, q: f64) -> LogScalar {
    let g = u.grid();
    let logs: Vec<f64> = g
        .boundary_faces()
        .iter()
        .map(|b| {
            let v = u.get(b.cell).abs();
            let term = if q == 0.0 { 0.0 } else { q * v.ln() };
            term + b.area.ln()
        })
        .collect();
    LogScalar::from_ln(log_sum_exp(&logs))
}

fn energy(u: &SpatialField, w: &SpatialField, p: &SobolevParams) -> Result<(LogScalar, bool)> {
    let e = grad_energy(u, w, p.alpha, p.s, p.p)?;
    Ok((LogScalar::new(e.value), e.degenerate))
}

/// `G1` and `G2`, shared by the elliptic and trace estimates.
fn g1_g2(phi: &SpatialField, w: &SpatialField, p: &SobolevParams) -> Result<(LogScalar, LogScalar)> {
    let g = phi.grid();
    let den = p.alpha * (p.p - 1.0) + p.s - p.p;
    let g1 = log_weight_integral(g, &[(phi, -(p.alpha - p.s + p.p) / den)])?.value.powf(den / p.alpha);
    let g2 = log_weight_integral(g, &[(w, -p.r1 / (1.0 - p.r1))])?.value.powf((1.0 - p.r1) / p.r1);
    Ok((g1, g2))
}

fn check_weights(phi: &SpatialField, w: &SpatialField, u: &SpatialField) -> Result<()> {
    phi.require_positive()?;
    w.require_positive()?;
    u.require_same_grid(phi)?;
    u.require_same_grid(w)
}

/// Elliptic weighted Sobolev estimate:
/// `int |u|^{alpha+r} omega <= eps E + D1 Phi1 I^{1+r/alpha} + eps^{-theta/(1-theta)} D2 Phi2 I^{1+mu1/alpha}`
/// with `E = int |u|^{alpha-s} |grad u|^p W` and `I = int |u|^alpha phi`.
pub fn check_weighted_sobolev(
    u: &SpatialField,
    phi: &SpatialField,
    w: &SpatialField,
    omega: &SpatialField,
    p: &SobolevParams,
    c: &EmbeddingConstants,
) -> Result<CheckOutcome> {
    check_weights(phi, w, u)?;
    if omega.min() < 0.0 {
        return Err(Error::InvalidInput("omega must be nonnegative".into()));
    }
    let g = u.grid();
    let au = abs_field(u)?;
    let lhs = log_weight_integral(g, &[(&au, p.alpha + p.r), (omega, 1.0)])?.value;
    let i = log_weight_integral(g, &[(&au, p.alpha), (phi, 1.0)])?.value;
    let (e, degenerate) = energy(u, w, p)?;
    let (g1, g2) = g1_g2(phi, w, p)?;
    let th = p.theta;
    let g3 = log_weight_integral(g, &[(phi, -1.0), (omega, 1.0 / ((1.0 - th) * (1.0 + p.mu1 / p.alpha)))])?
        .value
        .powf(1.0 + p.mu1 / p.alpha);
    let phi1 = g1.powf(th) * g3.powf(1.0 - th);
    let phi2 = g2.powf(th / (1.0 - th)) * g3;
    let eps = LogScalar::new(p.epsilon);
    let terms = vec![
        ("energy".to_string(), eps * e),
        ("D1_Phi1".to_string(), d1(c.c4, p.m, th, p.p) * phi1 * i.powf(1.0 + p.r / p.alpha)),
        (
            "D2_Phi2".to_string(),
            eps.powf(-th / (1.0 - th)) * d2(c.c3, p.m, th, p.p) * phi2 * i.powf(1.0 + p.mu1 / p.alpha),
        ),
    ];
    let mut out = CheckOutcome::assemble(CheckKind::WeightedSobolev, lhs, terms);
    out.degenerate = degenerate;
    Ok(out)
}

/// One-weight trace estimate:
/// `int_Gamma |u|^alpha <= eps E + c5 int |u|^alpha + (c6 alpha)^{p/(p-1)} eps^{-1/(p-1)} int |u|^{alpha+(s-p)/(p-1)} W^{-1/(p-1)}`.
pub fn check_trace_simple(
    u: &SpatialField,
    w: &SpatialField,
    p: &SobolevParams,
    c: &EmbeddingConstants,
) -> Result<CheckOutcome> {
    w.require_positive()?;
    u.require_same_grid(w)?;
    let need = p.s.max((p.p - p.s) / (p.p - 1.0));
    if !(p.alpha >= need) {
        return Err(Error::Inadmissible { conditions: vec![format!("alpha >= max(s, (p-s)/(p-1)) = {need}")] });
    }
    let g = u.grid();
    let au = abs_field(u)?;
    let lhs = log_boundary_power(u, p.alpha);
    let (e, degenerate) = energy(u, w, p)?;
    let q = p.alpha + (p.s - p.p) / (p.p - 1.0);
    let vol = log_weight_integral(g, &[(&au, p.alpha)])?.value;
    let tail = log_weight_integral(g, &[(&au, q), (w, -1.0 / (p.p - 1.0))])?.value;
    let eps = LogScalar::new(p.epsilon);
    let terms = vec![
        ("energy".to_string(), eps * e),
        ("c5_volume".to_string(), LogScalar::new(c.c5) * vol),
        (
            "c6_tail".to_string(),
            LogScalar::new(c.c6 * p.alpha).powf(p.p / (p.p - 1.0)) * eps.powf(-1.0 / (p.p - 1.0)) * tail,
        ),
    ];
    let mut out = CheckOutcome::assemble(CheckKind::TraceOneWeight, lhs, terms);
    out.degenerate = degenerate;
    Ok(out)
}

/// Two-weight trace estimate for `int_Gamma |u|^{alpha+r}`, in the branch
/// selected by the sign of `r_tilde`.
pub fn check_trace_two_weight(
    u: &SpatialField,
    phi: &SpatialField,
    w: &SpatialField,
    p: &SobolevParams,
    c: &EmbeddingConstants,
) -> Result<CheckOutcome> {
    check_weights(phi, w, u)?;
    let branch = p.trace_branch()?;
    let g = u.grid();
    let au = abs_field(u)?;
    let lhs = log_boundary_power(u, p.alpha + p.r);
    let i = log_weight_integral(g, &[(&au, p.alpha), (phi, 1.0)])?.value;
    let (e, degenerate) = energy(u, w, p)?;
    let (g1, g2) = g1_g2(phi, w, p)?;
    let (th, pp, al) = (p.theta, p.p, p.alpha);
    let phi_inv = log_weight_integral(g, &[(phi, -1.0)])?.value;
    let g4 = phi_inv.powf(1.0 + p.mu1 / al);
    let phi3 = g1.powf(th) * g4.powf(1.0 - th);
    let phi4 = g2.powf(th / (1.0 - th)) * g4;
    let c5 = LogScalar::new(c.c5);
    let z1 = c5 * d1(c.c4, p.m, th, pp);
    let z2 = c5.powf(1.0 / (1.0 - th)) * d2(c.c3, p.m, th, pp);
    let z3 = LogScalar::new(c.c6 * (al + p.r)).powf(pp / (pp - 1.0));
    let eps = LogScalar::new(p.epsilon);
    let mut terms = vec![
        ("z1_Phi3".to_string(), z1 * phi3 * i.powf(1.0 + p.r / al)),
        ("z2_Phi4".to_string(), eps.powf(-th / (1.0 - th)) * z2 * phi4 * i.powf(1.0 + p.mu1 / al)),
    ];
    let rt = p.r_tilde;
    match branch {
        TraceBranch::NegativeShift => {
            let phi5 = log_weight_integral(g, &[(w, al / ((pp - 1.0) * rt)), (phi, (al + rt) / rt)])?
                .value
                .powf(-rt / al);
            terms.insert(0, ("energy".to_string(), LogScalar::new(2.0) * eps * e));
            terms.push(("z3_Phi5".to_string(), eps.powf(-1.0 / (pp - 1.0)) * z3 * phi5 * i.powf(1.0 + rt / al)));
        }
        TraceBranch::NonNegativeShift { theta_tilde: tt, mu1_tilde: mt } => {
            let g5 = log_weight_integral(
                g,
                &[(phi, -1.0), (w, -1.0 / ((pp - 1.0) * (1.0 - tt) * (1.0 + mt / al)))],
            )?
            .value
            .powf(1.0 + mt / al);
            let phi6 = g1.powf(tt) * g5.powf(1.0 - tt);
            let phi7 = g2.powf(tt / (1.0 - tt)) * g5;
            let z4 = z3 * d1(c.c4, p.m, tt, pp);
            let z5 = z3.powf(1.0 / (1.0 - tt)) * d2(c.c3, p.m, tt, pp);
            let e5 = -(1.0 / (pp - 1.0) + pp / (pp - 1.0) * tt / (1.0 - tt));
            terms.insert(0, ("energy".to_string(), LogScalar::new(3.0) * eps * e));
            terms.push(("z4_Phi6".to_string(), eps.powf(-1.0 / (pp - 1.0)) * z4 * phi6 * i.powf(1.0 + rt / al)));
            terms.push(("z5_Phi7".to_string(), eps.powf(e5) * z5 * phi7 * i.powf(1.0 + mt / al)));
        }
    }
    let mut out = CheckOutcome::assemble(CheckKind::TraceTwoWeight, lhs, terms);
    out.branch = Some(branch);
    out.degenerate = degenerate;
    Ok(out)
}

/// `ln` of the trapezoid rule over samples given in log form.
fn log_trapezoid(times: &[f64], logs: &[f64]) -> f64 {
    let mut parts = Vec::with_capacity(2 * times.len());
    for k in 0..times.len() - 1 {
        let half = (0.5 * (times[k + 1] - times[k])).ln();
        parts.push(half + logs[k]);
        parts.push(half + logs[k + 1]);
    }
    log_sum_exp(&parts)
}

/// Parabolic Sobolev estimate for time-sampled `u`:
/// `||u||_{L^{kappa alpha}_phi(Q_T)} <= (c7^p m^{1/r1} Phi8)^{1/(kappa alpha)} (int int E + int int |u|^{alpha-s+p} phi)^{1/(kappa alpha)} sup_t ||u||_{L^alpha_phi}^{1-theta0}`.
///
/// Time integrals use the trapezoid rule over the samples.
pub fn check_parabolic_sobolev(
    samples: &[(f64, SpatialField)],
    phi: &SpatialField,
    w: &SpatialField,
    p: &SobolevParams,
    c: &EmbeddingConstants,
) -> Result<CheckOutcome> {
    if samples.len() < 2 {
        return Err(Error::InvalidInput("parabolic check needs at least two time samples".into()));
    }
    if samples.windows(2).any(|s| s[1].0 <= s[0].0) {
        return Err(Error::InvalidInput("time samples must increase strictly".into()));
    }
    let g = phi.grid();
    let (al, pp, rs, r1) = (p.alpha, p.p, p.r_star, p.r1);
    let ka = p.kappa * al;
    let mut lhs_logs = Vec::new();
    let mut energy_logs = Vec::new();
    let mut sup_ln = f64::NEG_INFINITY;
    let mut degenerate = false;
    for (_, u) in samples {
        check_weights(phi, w, u)?;
        let au = abs_field(u)?;
        lhs_logs.push(log_weight_integral(g, &[(&au, ka), (phi, 1.0)])?.value.ln());
        let e = grad_energy(u, w, al, p.s, pp)?;
        degenerate |= e.degenerate;
        let m = log_weight_integral(g, &[(&au, al - p.s + pp), (phi, 1.0)])?.value;
        energy_logs.push(LogScalar::new(e.value).add(m).ln());
        sup_ln = sup_ln.max(log_weight_integral(g, &[(&au, al), (phi, 1.0)])?.value.ln() / al);
    }
    let times: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let lhs = LogScalar::from_ln(log_trapezoid(&times, &lhs_logs) / ka);
    let phi8 = log_weight_integral(g, &[(phi, 2.0 / rs - 1.0)])?.value.powf(rs / 2.0)
        * log_weight_integral(g, &[(w, -r1 / (1.0 - r1))])?
            .value
            .powf(1.0 - r1)
            .add(log_weight_integral(g, &[(phi, -r1 / (1.0 - r1))])?.value.powf(1.0 - r1))
            .powf(1.0 / r1);
    let prefactor = (LogScalar::new(c.c7).powf(pp) * LogScalar::new(p.m).powf(1.0 / r1) * phi8).powf(1.0 / ka);
    let energy_total = LogScalar::from_ln(log_trapezoid(&times, &energy_logs)).powf(1.0 / ka);
    let sup = LogScalar::from_ln(sup_ln).powf(1.0 - p.theta0);
    let terms = vec![("product".to_string(), prefactor * energy_total * sup)];
    let mut out = CheckOutcome::assemble(CheckKind::ParabolicSobolev, lhs, terms);
    out.degenerate = degenerate;
    Ok(out)
}
