use super::exponents::ExponentBook;
use crate::error::{Error, Result};
use crate::logspace::LogScalar;
use serde::Serialize;

/// Default truncation tolerance on the estimated omitted tail `sum |factor - 1|`.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-14;
/// Hard cap on the number of factors.
pub const MAX_FACTORS: usize = 100_000;

/// Products and powers of the iteration from `L^{beta_1}` to `L^infinity`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MoserProducts {
    /// `prod_{j>=0} nu1(beta_j)/beta_j`.
    pub mu_tilde: f64,
    /// `prod_{j>=0} nu2(beta_j)/beta_j`.
    pub nu_tilde: f64,
    /// `prod_{j>=1} nu2(beta_j)/beta_j`.
    pub g: f64,
    /// `sum_{j>=0} (j+1)/beta_j = 1/(alpha0 (1 - 1/kappa_tilde)^2)`.
    pub weight_sum: f64,
    pub omega: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub omega3: f64,
    /// Factors multiplied before truncation, per product.
    pub terms_mu: usize,
    pub terms_nu: usize,
    /// Estimated `sum |factor - 1|` over the omitted tail, per product.
    pub tail_mu: f64,
    pub tail_nu: f64,
    pub truncation_tol: f64,
}

struct Product {
    value: f64,
    terms: usize,
    tail: f64,
}

/// `prod_{j>=start} f(j)` in log space, stopping once the geometric estimate
/// of the omitted `sum |f(j) - 1|` falls below `tol`.
fn truncated_product(start: usize, ratio: f64, tol: f64, f: impl Fn(usize) -> f64) -> Result<Product> {
    let mut ln = 0.0;
    let mut j = start;
    loop {
        let v = f(j);
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Inadmissible { conditions: vec![format!("product factor {v} at j = {j} is not positive")] });
        }
        ln += v.ln();
        j += 1;
        // The deviations decay like kappa_tilde^{-j}, so the tail is geometric.
        let tail = (v - 1.0).abs() / (ratio - 1.0);
        if tail < tol || j - start >= MAX_FACTORS {
            return Ok(Product { value: ln.exp(), terms: j - start, tail });
        }
    }
}

/// Completes the book with the iteration products and powers.
pub fn moser_products(book: &ExponentBook, truncation_tol: f64) -> Result<ExponentBook> {
    if !(truncation_tol > 0.0) {
        return Err(Error::InvalidInput(format!("truncation tolerance must be > 0, got {truncation_tol}")));
    }
    let kt = book.kappa_tilde;
    let mu = truncated_product(0, kt, truncation_tol, |j| book.nu1(book.beta(j)) / book.beta(j))?;
    let nu = truncated_product(0, kt, truncation_tol, |j| book.nu2(book.beta(j)) / book.beta(j))?;
    let g = truncated_product(1, kt, truncation_tol, |j| book.nu2(book.beta(j)) / book.beta(j))?;
    let weight_sum = 1.0 / (book.alpha0 * (1.0 - 1.0 / kt).powi(2));
    let omega = g.value * weight_sum;
    let half = book.r_star / 2.0;
    let mut out = book.clone();
    out.moser = Some(MoserProducts {
        mu_tilde: mu.value,
        nu_tilde: nu.value,
        g: g.value,
        weight_sum,
        omega,
        omega1: (2.0 + half) * omega,
        omega2: (1.0 + half) * omega,
        omega3: (3.0 + half) * omega,
        terms_mu: mu.terms,
        terms_nu: nu.terms,
        tail_mu: mu.tail,
        tail_nu: nu.tail,
        truncation_tol,
    });
    Ok(out)
}

/// Outcome of the bound for sequences obeying
/// `y_{j+1} <= A^{omega_j/kappa_j} (y_j^{r_j} + y_j^{s_j})^{1/kappa_j}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GennReport {
    /// `(2A)^{G alpha_bar} max(y0^{beta_bar}, y0^{gamma_bar})`.
    pub bound: LogScalar,
    pub alpha_bar: f64,
    pub beta_bar: f64,
    pub gamma_bar: f64,
    pub g: f64,
    /// `y_J` from the direct iteration with equality.
    pub y_final: LogScalar,
    pub horizon: usize,
    pub verified: bool,
}

/// Evaluates the sequence bound over a finite horizon and checks it against
/// the equality iteration. `a` is `A >= 1`; all sequences share the horizon.
pub fn genn_bound(a: LogScalar, y0: f64, kappa: &[f64], r: &[f64], s: &[f64], omega: &[f64]) -> Result<GennReport> {
    let horizon = kappa.len();
    if horizon == 0 || r.len() != horizon || s.len() != horizon || omega.len() != horizon {
        return Err(Error::InvalidInput("sequences must be nonempty and of equal length".into()));
    }
    if !(a.ln() >= 0.0) || !(y0 >= 0.0) {
        return Err(Error::InvalidInput(format!("need A >= 1 and y0 >= 0, got ln A = {}, y0 = {y0}", a.ln())));
    }
    for j in 0..horizon {
        if !(kappa[j] > 0.0 && r[j] > 0.0 && s[j] >= r[j] && omega[j] > 0.0) {
            return Err(Error::InvalidInput(format!("sequence entry {j} violates kappa, r > 0, s >= r, omega > 0")));
        }
    }
    let terms: Vec<f64> = (0..horizon).map(|j| omega[j] / kappa[j]).collect();
    let alpha_bar: f64 = terms.iter().sum();
    if terms[horizon - 1] > 1e-6 * alpha_bar {
        return Err(Error::DegenerateFamily(format!(
            "sum of omega_j/kappa_j has not settled by j = {horizon} (last term {:e})",
            terms[horizon - 1]
        )));
    }
    let ln_beta: f64 = (0..horizon).map(|j| (r[j] / kappa[j]).ln()).sum();
    let ln_gamma: Vec<f64> = (0..horizon).map(|j| (s[j] / kappa[j]).ln()).collect();
    let gamma_bar_ln: f64 = ln_gamma.iter().sum();
    // Largest product over runs of consecutive gamma_j with 1 <= j < horizon (Kadane).
    let (mut best, mut run) = (0.0f64, 0.0f64);
    for &l in ln_gamma.iter().skip(1) {
        run = (run + l).max(l);
        best = best.max(run);
    }
    let g = best.exp();
    let seed = if y0 == 0.0 {
        LogScalar::ZERO
    } else {
        LogScalar::new(y0).powf(ln_beta.exp()).max(LogScalar::new(y0).powf(gamma_bar_ln.exp()))
    };
    let bound = (a * 2.0).powf(g * alpha_bar) * seed;

    let mut y = LogScalar::new(y0);
    for j in 0..horizon {
        let inner = y.powf(r[j]).add(y.powf(s[j]));
        y = (a.powf(omega[j]) * inner).powf(1.0 / kappa[j]);
    }
    let verified = y.ln() <= bound.ln() + 1e-9f64.ln_1p();
    Ok(GennReport {
        bound,
        alpha_bar,
        beta_bar: ln_beta.exp(),
        gamma_bar: gamma_bar_ln.exp(),
        g,
        y_final: y,
        horizon,
        verified,
    })
}

/// The iteration sequences of the `L^infinity` estimate over `horizon` steps:
/// `(kappa_j, r_j, s_j, omega_j) = (beta_j, nu1(beta_j), nu2(beta_j), j + 1)`.
pub fn moser_sequences(book: &ExponentBook, horizon: usize) -> [Vec<f64>; 4] {
    let beta: Vec<f64> = (0..horizon).map(|j| book.beta(j)).collect();
    let r = beta.iter().map(|&b| book.nu1(b)).collect();
    let s = beta.iter().map(|&b| book.nu2(b)).collect();
    let omega = (0..horizon).map(|j| (j + 1) as f64).collect();
    [beta, r, s, omega]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::exponents::{build_exponents, ExponentInputs};
    use proptest::prelude::*;

    fn gas_book(alpha0: f64) -> ExponentBook {
        let inputs = ExponentInputs {
            r1: Some(2.0 / 3.0),
            r: Some(1.0),
            alpha0: Some(alpha0),
            kappa_tilde: Some(1.03),
            ..ExponentInputs::new(2, 0.5, 0.5)
        };
        moser_products(&build_exponents(&inputs).unwrap(), DEFAULT_TRUNCATION_TOL).unwrap()
    }

    #[test]
    fn huge_alpha0_makes_products_trivial() {
        let m = gas_book(1e9).moser.unwrap();
        assert!((m.mu_tilde - 1.0).abs() < 1e-6);
        assert!((m.nu_tilde - 1.0).abs() < 1e-6);
    }

    #[test]
    fn nu_tilde_matches_long_direct_product() {
        let b = gas_book(40.0);
        let m = b.moser.as_ref().unwrap();
        // Independent oracle: plain running product of the closed-form factors.
        let x = |j: i32| 0.5 / (1.03f64.powi(j) * 40.0 * 1.125);
        let mut direct = 1.0;
        for j in 0..=2000 {
            direct /= 1.0 - x(j);
        }
        assert!((m.nu_tilde - direct).abs() <= 1e-13 * direct, "{} vs {direct}", m.nu_tilde);
        assert!(m.nu_tilde > 1.0 && m.mu_tilde > 0.0 && m.mu_tilde <= 1.0);
        assert!((m.g - m.nu_tilde * (1.0 - x(0))).abs() < 1e-13 * m.g);
        assert!(m.omega > 0.0);
        assert!(m.tail_nu < 1e-12);
    }

    #[test]
    fn truncation_tolerance_barely_matters() {
        let b = gas_book(40.0);
        let loose = moser_products(&b, 1e-14).unwrap().moser.unwrap();
        let tight = moser_products(&b, 1e-16).unwrap().moser.unwrap();
        assert!((loose.mu_tilde - tight.mu_tilde).abs() < 1e-12);
        assert!((loose.nu_tilde - tight.nu_tilde).abs() < 1e-12);
        assert!(tight.terms_nu > loose.terms_nu);
    }

    #[test]
    fn genn_doubling_family_bound_is_four() {
        let k: Vec<f64> = (0..60).map(|j| 2f64.powi(j + 1)).collect();
        let rep = genn_bound(LogScalar::new(2.0), 1.0, &k, &k, &k, &vec![1.0; 60]).unwrap();
        assert!((rep.bound.value() - 4.0).abs() < 1e-12);
        assert!((rep.alpha_bar - 1.0).abs() < 1e-12);
        assert_eq!(rep.g, 1.0);
        assert!(rep.verified && rep.y_final.value() <= 4.0);
    }

    #[test]
    fn genn_zero_seed() {
        let k: Vec<f64> = (0..40).map(|j| 2f64.powi(j + 1)).collect();
        let rep = genn_bound(LogScalar::new(3.0), 0.0, &k, &k, &k, &vec![1.0; 40]).unwrap();
        assert_eq!(rep.bound, LogScalar::ZERO);
        assert_eq!(rep.y_final, LogScalar::ZERO);
        assert!(rep.verified);
    }

    #[test]
    fn genn_rejects_divergent_weights() {
        let k = vec![1.0; 50];
        assert!(matches!(genn_bound(LogScalar::ONE, 1.0, &k, &k, &k, &k), Err(Error::DegenerateFamily(_))));
    }

    #[test]
    fn moser_sequences_respect_their_bound() {
        let b = gas_book(40.0);
        let [k, r, s, w] = moser_sequences(&b, 3000);
        for y0 in [0.3, 1.0, 7.0] {
            let rep = genn_bound(LogScalar::new(50.0), y0, &k, &r, &s, &w).unwrap();
            assert!(rep.verified, "y0 = {y0}: {rep:?}");
        }
    }

    proptest! {
        #[test]
        fn random_geometric_families_verify(
            q in 1.3f64..3.0,
            k0 in 1.0f64..4.0,
            shrink in 0.5f64..1.0,
            grow in 0.0f64..0.5,
            ln_a in 0.0f64..5.0,
            y0 in 0.0f64..10.0,
        ) {
            let horizon = 120;
            let k: Vec<f64> = (0..horizon).map(|j| k0 * q.powi(j as i32)).collect();
            let r: Vec<f64> = k.iter().enumerate().map(|(j, v)| v * (1.0 - (1.0 - shrink) / q.powi(j as i32))).collect();
            let s: Vec<f64> = k.iter().enumerate().map(|(j, v)| v * (1.0 + grow / q.powi(j as i32))).collect();
            let w: Vec<f64> = (0..horizon).map(|j| (j + 1) as f64).collect();
            let rep = genn_bound(LogScalar::from_ln(ln_a), y0, &k, &r, &s, &w).unwrap();
            prop_assert!(rep.verified);
        }
    }
}
