use super::curve::AlphaCurve;
use super::exponents::ExponentBook;
use super::integrals::DataIntegrals;
use super::proof::ProofConstants;
use crate::error::{Error, Result};
use crate::logspace::{log_sum_exp, LogScalar};
use serde::Serialize;

/// Nodes of the composite Simpson rule for `int_0^T V`.
const SIMPSON_NODES: usize = 2001;

/// The `L^infinity` bound on `U x (epsilon, T)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinftyReport {
    pub t_final: f64,
    pub epsilon: f64,
    pub beta1: f64,
    /// `||u0||` in `L^{beta1}` with weight `phi`.
    pub u0_norm: f64,
    /// `(3 Z* mu_max/beta1) V0^{mu_max/beta1} int_0^T M`.
    pub delta_t: f64,
    /// `delta_T < 1`, so the weighted bound covers `[0, T]`.
    pub certified: bool,
    pub chat: [LogScalar; 3],
    /// Bound in terms of `u0`; `+inf` when not certified.
    pub lb2: LogScalar,
    /// Bound in terms of `int_0^T V`; `None` when not certified.
    pub lb1: Option<LogScalar>,
    pub v_integral: Option<LogScalar>,
}

/// Evaluates the `L^infinity` bounds for `t in (epsilon, T)`.
///
/// The book must carry the iteration products and `alpha = beta1`; `proof`
/// and `curve` must be built from that book.
pub fn linfty_bound(
    book: &ExponentBook,
    integrals: &DataIntegrals,
    proof: &ProofConstants,
    curve: &AlphaCurve,
    t_final: f64,
    epsilon: f64,
    u0_norm: f64,
) -> Result<LinftyReport> {
    let mp = book
        .moser
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("iteration products have not been computed".into()))?;
    let chat = proof.chat.ok_or_else(|| Error::InvalidInput("proof constants lack the iteration constants".into()))?;
    let beta1 = book.beta1;
    if book.alpha != beta1 || curve.alpha != beta1 || integrals.alpha != beta1 {
        return Err(Error::InvalidInput(format!(
            "the weighted estimate must use alpha = beta1 = {beta1} (book {}, curve {}, integrals {})",
            book.alpha, curve.alpha, integrals.alpha
        )));
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidInput(format!("T must be > 0, got {t_final}")));
    }
    if !(epsilon > 0.0 && epsilon < t_final.min(1.0)) {
        return Err(Error::InvalidInput(format!("need 0 < epsilon < min(1, T), got epsilon = {epsilon}, T = {t_final}")));
    }
    if !(u0_norm >= 0.0 && u0_norm.is_finite()) {
        return Err(Error::InvalidInput(format!("initial norm must be finite and >= 0, got {u0_norm}")));
    }
    let delta_t = curve.budget_fraction(t_final);
    let certified = delta_t < 1.0;
    let [_, chat1, chat2] = chat;
    let common = LogScalar::new(epsilon).powf(-mp.omega2)
        * integrals.n3.powf(mp.omega3)
        * integrals.psi_t.powf(mp.omega2);
    let one_t = LogScalar::new(1.0 + t_final);
    let (lb2, lb1, v_integral) = if certified {
        let lb2 = chat2
            * common
            * one_t.powf(mp.omega1 + mp.nu_tilde / beta1)
            * LogScalar::new(1.0 - delta_t).powf(-mp.nu_tilde / book.mu_max)
            * LogScalar::new(1.0 + u0_norm).powf(mp.nu_tilde);
        let vl = simpson_ln(|t| curve.ln_v_at(t), t_final);
        let lb1 = chat1 * common * one_t.powf(mp.omega1) * vl.powf(mp.mu_tilde / beta1).max(vl.powf(mp.nu_tilde / beta1));
        (lb2, Some(lb1), Some(vl))
    } else {
        (LogScalar::from_ln(f64::INFINITY), None, None)
    };
    Ok(LinftyReport { t_final, epsilon, beta1, u0_norm, delta_t, certified, chat, lb2, lb1, v_integral })
}

/// Composite Simpson rule for `int_0^t exp(ln_f)`, summed in log space.
fn simpson_ln(ln_f: impl Fn(f64) -> f64, t: f64) -> LogScalar {
    let n = SIMPSON_NODES - 1;
    let h = t / n as f64;
    let terms: Vec<f64> = (0..=n)
        .map(|i| {
            let w: f64 = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            w.ln() + ln_f(i as f64 * h)
        })
        .collect();
    LogScalar::from_ln(log_sum_exp(&terms) + (h / 3.0).ln())
}

#[cfg(test)]
mod tests {
    use crate::bounds::{bound_report, BoundOptions};
    use crate::harness::EmbeddingConstants;
    use crate::logspace::LogScalar;
    use crate::solver::Scenario;

    fn consts() -> EmbeddingConstants {
        EmbeddingConstants::user_supplied([1.0; 7]).unwrap()
    }

    fn zero_data(t: f64) -> Scenario {
        let sc = Scenario::reference(8, 0.0, t).unwrap();
        sc.clone().with_initial(crate::grid::SpatialField::constant(sc.grid, 0.0, "u0")).unwrap()
    }

    /// Report at `T = threshold/2` and `epsilon = eps_frac T`.
    fn report(eps_frac: f64) -> crate::bounds::BoundReport {
        let probe = bound_report(&zero_data(1.0), &consts(), &BoundOptions::small_r()).unwrap();
        let t = 0.5 * probe.curve.t_threshold;
        let opts = BoundOptions { epsilon: Some(eps_frac * t), ..BoundOptions::small_r() };
        bound_report(&zero_data(t), &consts(), &opts).unwrap()
    }

    #[test]
    fn epsilon_scaling_is_a_power_law() {
        let a = report(0.4);
        let b = report(0.2);
        let (la, lb) = (a.linfty.as_ref().unwrap(), b.linfty.as_ref().unwrap());
        let omega2 = a.book.moser.as_ref().unwrap().omega2;
        let ratio = lb.lb2.ln() - la.lb2.ln();
        assert!((ratio - omega2 * std::f64::consts::LN_2).abs() <= 1e-9 * ratio.abs());
    }

    #[test]
    fn zero_data_delta_is_linear_in_t() {
        let r = report(0.4);
        let l = r.linfty.as_ref().unwrap();
        let c = &r.curve;
        assert_eq!(c.v0, LogScalar::ONE);
        assert!((l.delta_t - 0.5).abs() < 1e-9);
        let want = (3.0 * c.mu_max / r.book.beta1).ln() + c.z_star.ln() + l.t_final.ln();
        let want = want.exp();
        assert!((l.delta_t - want).abs() <= 1e-12 * want, "{} vs {want}", l.delta_t);
        assert!(l.certified && l.lb2.ln().is_finite() && l.lb2.ln() > 0.0);
        assert!(l.lb1.unwrap().ln() <= l.lb2.ln() + 1e-9);
    }

    #[test]
    fn lb2_matches_straight_line_evaluation() {
        let r = report(0.4);
        let l = r.linfty.as_ref().unwrap();
        let mp = r.book.moser.as_ref().unwrap();
        let d = &r.integrals;
        let t = l.t_final;
        // Oracle: rebuild Chat0 from c11 and sum logs term by term.
        let a = r.book.a;
        let ln_chat0 = mp.omega
            * ((2.0 + r.book.r_star / 2.0) * 2f64.ln()
                + r.proof.c11.ln()
                + 3.0 * (3.0 - 2.0 * a) / (2.0 * (1.0 - a)) * r.book.beta1.ln());
        let ln_chat2 = ln_chat0 + mp.omega2 * 2f64.ln() + mp.nu_tilde / r.book.beta1 * 2f64.ln();
        let want = ln_chat2 - mp.omega2 * l.epsilon.ln()
            + (mp.omega1 + mp.nu_tilde / r.book.beta1) * (1.0 + t).ln()
            - mp.nu_tilde / r.book.mu_max * (1.0 - l.delta_t).ln()
            + mp.omega3 * d.n3.ln()
            + mp.omega2 * d.psi_t.ln()
            + mp.nu_tilde * (1.0 + l.u0_norm).ln();
        assert!((l.lb2.ln() - want).abs() <= 1e-10 * want.abs(), "{} vs {want}", l.lb2.ln());
    }

    #[test]
    fn epsilon_must_be_small() {
        let opts = BoundOptions { epsilon: Some(1.0), ..BoundOptions::small_r() };
        assert!(bound_report(&zero_data(1.0), &consts(), &opts).is_err());
    }
}
