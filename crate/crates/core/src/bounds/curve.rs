use super::exponents::ExponentBook;
use super::proof::ProofConstants;
use crate::error::{Error, Result};
use crate::grid::{log_weight_integral, SpatialField, TimeSeries};
use crate::logspace::LogScalar;
use serde::Serialize;

/// Points on the tabulated bound curves.
pub const CURVE_POINTS: usize = 101;

/// Bound on `int u^beta` derived from the weighted curve by Hölder.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BetaCurve {
    pub beta: f64,
    /// `int phi^{-beta/(alpha - beta)}`.
    pub c_alpha_beta: LogScalar,
    pub bound: TimeSeries,
}

/// The weighted `L^alpha` bound `V(t)` and its blow-up time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaCurve {
    pub alpha: f64,
    pub mu_max: f64,
    pub mu_min: f64,
    pub z_star: LogScalar,
    /// `1 + int phi u0^alpha`.
    pub v0: LogScalar,
    /// `ln(alpha/(3 Z* mu_max) V0^{-mu_max/alpha})`, the budget for `int_0^T M`.
    pub ln_budget: f64,
    /// First time at which `int_0^t M` exhausts the budget.
    pub t_threshold: f64,
    /// `M(t)` samples; held constant past the last sample.
    pub m_series: TimeSeries,
    /// `ln V(t)` on `CURVE_POINTS` times in `[0, min(horizon, T_threshold))`.
    pub ln_v: TimeSeries,
    pub beta_curve: Option<BetaCurve>,
}

impl AlphaCurve {
    /// `int_0^t M` by the trapezoid rule on the samples.
    pub fn m_integral(&self, t: f64) -> f64 {
        self.m_series.integral_to(t)
    }

    /// `int_0^t M` divided by the budget.
    pub fn budget_fraction(&self, t: f64) -> f64 {
        let i = self.m_integral(t);
        if i == 0.0 {
            0.0
        } else {
            (i.ln() - self.ln_budget).exp()
        }
    }

    /// `V(t) = V0 (1 - int_0^t M / budget)^{-alpha/mu_max}`; infinite from `T_threshold` on.
    pub fn v_at(&self, t: f64) -> f64 {
        self.ln_v_at(t).exp()
    }

    pub fn ln_v_at(&self, t: f64) -> f64 {
        let x = 1.0 - self.budget_fraction(t);
        if x <= 0.0 {
            return f64::INFINITY;
        }
        self.v0.ln() - self.alpha / self.mu_max * x.ln()
    }
}

/// `C_{alpha,beta} = int phi^{-beta/(alpha - beta)}` for `0 < beta < alpha`.
pub fn c_alpha_beta(phi: &SpatialField, alpha: f64, beta: f64) -> Result<LogScalar> {
    if !(beta > 0.0 && beta < alpha) {
        return Err(Error::InvalidInput(format!("need 0 < beta < alpha, got beta = {beta}, alpha = {alpha}")));
    }
    Ok(log_weight_integral(phi.grid(), &[(phi, -beta / (alpha - beta))])?.value)
}

/// Builds `V(t)` from `Z*`, `V0` and the `M` samples, tabulated up to `horizon`.
///
/// `beta` optionally adds the unweighted bound with its `C_{alpha,beta}`.
pub fn alpha_bound_curve(
    book: &ExponentBook,
    proof: &ProofConstants,
    v0: LogScalar,
    m_series: &TimeSeries,
    horizon: f64,
    beta: Option<(f64, LogScalar)>,
) -> Result<AlphaCurve> {
    if !(v0.ln() >= 0.0 && v0.is_finite()) {
        return Err(Error::InvalidInput(format!("V0 must be finite and >= 1, got ln V0 = {}", v0.ln())));
    }
    if m_series.is_empty() || m_series.values.iter().any(|m| !(*m >= 1.0 && m.is_finite())) {
        return Err(Error::InvalidInput("M samples must be finite and >= 1".into()));
    }
    if !(horizon > 0.0) {
        return Err(Error::InvalidInput(format!("horizon must be > 0, got {horizon}")));
    }
    let (alpha, mu_max) = (book.alpha, book.mu_max);
    let ln_budget = (alpha / (3.0 * mu_max)).ln() - proof.z_star.ln() - mu_max / alpha * v0.ln();
    let budget = ln_budget.exp();
    if !(budget > 0.0) {
        return Err(Error::InvalidInput(format!(
            "blow-up time is not representable: ln(budget) = {ln_budget}"
        )));
    }
    // int_0^t M >= t, so the threshold lies in [0, budget].
    let mut lo = 0.0;
    let mut hi = budget;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if m_series.integral_to(mid) < budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut curve = AlphaCurve {
        alpha,
        mu_max,
        mu_min: book.mu_min,
        z_star: proof.z_star,
        v0,
        ln_budget,
        t_threshold: lo,
        m_series: m_series.clone(),
        ln_v: TimeSeries::new(),
        beta_curve: None,
    };
    let t_end = horizon.min(curve.t_threshold);
    let mut ln_v = TimeSeries::new();
    for i in 0..CURVE_POINTS {
        let t = t_end * i as f64 / CURVE_POINTS as f64;
        ln_v.push(t, curve.ln_v_at(t))?;
    }
    if let Some((b, c_ab)) = beta {
        if !(b > 0.0 && b < alpha) {
            return Err(Error::InvalidInput(format!("need 0 < beta < alpha, got {b}")));
        }
        let mut bound = TimeSeries::new();
        for (&t, &lv) in ln_v.times.iter().zip(&ln_v.values) {
            bound.push(t, (c_ab.powf(1.0 - b / alpha) * LogScalar::from_ln(lv).powf(b / alpha)).value())?;
        }
        curve.beta_curve = Some(BetaCurve { beta: b, c_alpha_beta: c_ab, bound });
    }
    curve.ln_v = ln_v;
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::exponents::{build_exponents, ExponentInputs};
    use proptest::prelude::*;

    /// A book with `alpha = 40`, `mu_max = 37.5` and a proof stub carrying only `Z*`.
    fn parts(z_star: f64) -> (ExponentBook, ProofConstants) {
        let inputs =
            ExponentInputs { r1: Some(2.0 / 3.0), r: Some(1.0), alpha: Some(40.0), ..ExponentInputs::new(2, 0.5, 0.5) };
        let book = build_exponents(&inputs).unwrap();
        let one = LogScalar::ONE;
        let proof = ProofConstants {
            c_z: 0.0,
            embedding: [1.0; 7],
            c0: 1.0,
            big_c1: one,
            big_c2: one,
            eps2: 1.0,
            eps3: 1.0,
            d1_theta: one,
            d2_theta: one,
            d1_theta_tilde: one,
            d2_theta_tilde: one,
            g: [one; 4],
            phi: [one; 4],
            z1: one,
            z2: one,
            z3: one,
            z4: one,
            z_star: LogScalar::new(z_star),
            c8: one,
            c9: one,
            c10: one,
            c11: one,
            chat: None,
        };
        (book, proof)
    }

    fn unit_m() -> TimeSeries {
        TimeSeries { times: vec![0.0, 1.0], values: vec![1.0, 1.0] }
    }

    #[test]
    fn golden_threshold_and_midpoint() {
        let (book, proof) = parts(80.0);
        let c = alpha_bound_curve(&book, &proof, LogScalar::ONE, &unit_m(), 1.0, None).unwrap();
        assert!((c.t_threshold - 40.0 / 9000.0).abs() < 1e-15);
        let mid = c.v_at(c.t_threshold / 2.0);
        assert!((mid - 2f64.powf(16.0 / 15.0)).abs() < 1e-12, "{mid}");
        assert_eq!(c.v_at(0.0), 1.0);
        assert_eq!(c.v_at(c.t_threshold * 1.01), f64::INFINITY);
    }

    #[test]
    fn v_blows_up_approaching_threshold() {
        let (book, proof) = parts(80.0);
        let c = alpha_bound_curve(&book, &proof, LogScalar::new(1.5), &unit_m(), 1.0, None).unwrap();
        let vals: Vec<f64> = (1..8).map(|k| c.v_at(c.t_threshold * (1.0 - 10f64.powi(-k)))).collect();
        assert!(vals.windows(2).all(|w| w[1] > 10.0 * w[0]), "{vals:?}");
        assert!(c.ln_v.values.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(c.ln_v.values[0], 1.5f64.ln());
    }

    #[test]
    fn beta_curve_is_holder_of_v() {
        let (book, proof) = parts(80.0);
        let c = alpha_bound_curve(&book, &proof, LogScalar::ONE, &unit_m(), 1.0, Some((20.0, LogScalar::new(2.0)))).unwrap();
        let bc = c.beta_curve.clone().unwrap();
        for (t, b) in bc.bound.times.iter().zip(&bc.bound.values) {
            let want = 2f64.sqrt() * c.v_at(*t).sqrt();
            assert!((b - want).abs() < 1e-12 * want);
        }
        assert!(alpha_bound_curve(&book, &proof, LogScalar::ONE, &unit_m(), 1.0, Some((40.0, LogScalar::ONE))).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let (book, proof) = parts(80.0);
        assert!(alpha_bound_curve(&book, &proof, LogScalar::new(0.5), &unit_m(), 1.0, None).is_err());
        let low = TimeSeries { times: vec![0.0], values: vec![0.5] };
        assert!(alpha_bound_curve(&book, &proof, LogScalar::ONE, &low, 1.0, None).is_err());
        let (book, proof) = parts(1e308);
        let mut huge = proof.clone();
        huge.z_star = LogScalar::from_ln(1e4);
        assert!(alpha_bound_curve(&book, &huge, LogScalar::ONE, &unit_m(), 1.0, None).is_err());
    }

    /// Classical RK4 on `V' = 3 Z* M(t) V^{1 + mu/alpha}`.
    fn rk4(c: &AlphaCurve, t_end: f64, steps: usize) -> f64 {
        let z = c.z_star.value();
        let e = 1.0 + c.mu_max / c.alpha;
        let f = |t: f64, v: f64| 3.0 * z * c.m_series.interpolate(t) * v.powf(e);
        let h = t_end / steps as f64;
        let mut v = c.v0.value();
        for i in 0..steps {
            let t = i as f64 * h;
            let k1 = f(t, v);
            let k2 = f(t + h / 2.0, v + h / 2.0 * k1);
            let k3 = f(t + h / 2.0, v + h / 2.0 * k2);
            let k4 = f(t + h, v + h * k3);
            v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        v
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn closed_form_matches_ode(z in 80.0f64..500.0, v0 in 1.0f64..3.0, m1 in 1.0f64..4.0, slope in 0.0f64..3.0) {
            let (book, proof) = parts(z);
            let m = TimeSeries {
                times: (0..=50).map(|i| i as f64 * 1e-4).collect(),
                values: (0..=50).map(|i| m1 + slope * (i as f64 / 50.0)).collect(),
            };
            let c = alpha_bound_curve(&book, &proof, LogScalar::new(v0), &m, 1.0, None).unwrap();
            let t = 0.9 * c.t_threshold;
            let ode = rk4(&c, t, 20_000);
            prop_assert!((ode - c.v_at(t)).abs() <= 0.01 * c.v_at(t), "{} vs {}", ode, c.v_at(t));
        }
    }
}
