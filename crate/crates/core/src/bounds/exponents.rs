use super::moser::MoserProducts;
use crate::error::{Error, Result};
use serde::Serialize;

/// One admissibility condition, evaluated with its numbers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub holds: bool,
    pub detail: String,
}

/// Optional overrides of the free exponents; `None` takes the default.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ExponentInputs {
    pub n: usize,
    pub a: f64,
    pub lambda: f64,
    pub r1: Option<f64>,
    pub r: Option<f64>,
    /// Exponent of the weighted `L^alpha` estimate; defaults to `beta_1 = kappa_tilde alpha0`.
    pub alpha: Option<f64>,
    pub alpha0: Option<f64>,
    pub kappa_tilde: Option<f64>,
    /// `p1..p5`.
    pub p: Option<[f64; 5]>,
}

impl ExponentInputs {
    pub fn new(n: usize, a: f64, lambda: f64) -> Self {
        ExponentInputs { n, a, lambda, ..Default::default() }
    }
}

/// Every exponent of the `L^alpha` and `L^infinity` estimates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentBook {
    pub n: usize,
    pub a: f64,
    pub lambda: f64,
    pub r1: f64,
    /// `1 + (2-a)/n - 1/r1`.
    pub r_star: f64,
    pub r: f64,
    /// `r + (r - 1 + lambda + a)/(1 - a)`.
    pub r_tilde: f64,
    pub alpha: f64,
    pub theta: f64,
    pub mu1: f64,
    pub theta_tilde: f64,
    pub mu1_tilde: f64,
    /// `(alpha + 1 - lambda - a)/(2 - a)`.
    pub m: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    pub kappa_tilde: f64,
    pub alpha0: f64,
    /// `kappa_tilde alpha0`.
    pub beta1: f64,
    /// `p1..p6`, with `p6 = p5 (p3(2-a) - 1)/(1-a)`.
    pub p: [f64; 6],
    /// Hölder conjugates of `p1..p5`.
    pub q: [f64; 5],
    pub h1: f64,
    pub h2: f64,
    /// `max(h2, 1 - a - lambda)`.
    pub h3: f64,
    /// `kappa(alpha0) = 1 + r*/2 + (1 - lambda - a)/alpha0`.
    pub kappa_alpha0: f64,
    pub nu1_alpha0: f64,
    pub nu2_alpha0: f64,
    pub conditions: Vec<Condition>,
    /// Defaults that were filled in, as `name = value`.
    pub defaults_used: Vec<String>,
    /// Filled by [`super::moser_products`].
    pub moser: Option<MoserProducts>,
}

/// `Theta(rho) = (alpha + 2 rho)/(alpha (1 + r*) + 2 (1 - a - lambda))`.
pub fn big_theta(alpha: f64, r_star: f64, a: f64, lambda: f64, rho: f64) -> f64 {
    (alpha + 2.0 * rho) / (alpha * (1.0 + r_star) + 2.0 * (1.0 - a - lambda))
}

/// `Lambda(rho, theta) = (rho + theta (a + lambda - 1))/(1 - theta)`.
pub fn big_lambda(a: f64, lambda: f64, rho: f64, theta: f64) -> f64 {
    (rho + theta * (a + lambda - 1.0)) / (1.0 - theta)
}

fn r_star_of(n: usize, a: f64, r1: f64) -> f64 {
    1.0 + (2.0 - a) / n as f64 - 1.0 / r1
}

/// Lower bound on `alpha` for the weighted `L^alpha` estimate.
fn alpha_section3_floor(a: f64, lambda: f64, r: f64, r_star: f64) -> f64 {
    (lambda + 1.0).max(2.0 * (2.0 - a) * (r + a + lambda - 1.0) / (r_star * (1.0 - a)))
}

/// Default `p1..p5` for a given `kappa_tilde`.
fn default_p(a: f64, kappa_tilde: f64) -> [f64; 5] {
    let p12 = 0.5 * (1.0 + kappa_tilde);
    let mut p3 = p12.sqrt();
    for _ in 0..200 {
        if (p3 * (2.0 - a) - 1.0) / (1.0 - a) < kappa_tilde {
            break;
        }
        p3 = 0.5 * (1.0 + p3);
    }
    let p5_hi = kappa_tilde * (1.0 - a) / (p3 * (2.0 - a) - 1.0);
    [p12, p12, p3, p3, 0.5 * (1.0 + p5_hi)]
}

struct Lower {
    caccioppoli: [f64; 3],
    gain: [f64; 2],
    kk: f64,
    linking: f64,
}

impl Lower {
    fn new(a: f64, lambda: f64, r: f64, r_star: f64, kappa_tilde: f64, p: &[f64; 6]) -> Self {
        Lower {
            caccioppoli: [
                lambda + 1.0,
                p[0] * (lambda * (3.0 - 2.0 * a) - 1.0) / (kappa_tilde - p[0]),
                p[4] * (a + lambda - 1.0) / ((1.0 - a) * (kappa_tilde - p[5])),
            ],
            gain: [2.0 * (lambda + a - 1.0) / r_star, (1.0 - lambda - a) / (kappa_tilde - 1.0)],
            kk: (lambda + a - 1.0) / (1.0 + r_star / 2.0 - kappa_tilde * kappa_tilde),
            linking: 2.0 * (2.0 - a) * (r + a + lambda - 1.0) / (kappa_tilde * r_star * (1.0 - a)),
        }
    }

    fn iteration(&self) -> f64 {
        self.caccioppoli.iter().chain(self.gain.iter()).copied().fold(self.kk, f64::max)
    }
}

fn cond(name: &'static str, holds: bool, detail: String) -> Condition {
    Condition { name, holds, detail }
}

/// Builds the exponent book, filling defaults and checking every
/// admissibility condition. Fails naming each violated condition.
pub fn build_exponents(inputs: &ExponentInputs) -> Result<ExponentBook> {
    let ExponentInputs { n, a, lambda, .. } = *inputs;
    if !(n == 2 || n == 3) {
        return Err(Error::InvalidInput(format!("bounds need n = 2 or 3, got {n}")));
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidInput(format!("degeneracy a must lie in (0, 1), got {a}")));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidInput(format!("lambda must be > 0, got {lambda}")));
    }
    let nf = n as f64;
    let mut defaults_used = Vec::new();
    fn fill(used: &mut Vec<String>, name: &str, given: Option<f64>, default: f64) -> f64 {
        given.unwrap_or_else(|| {
            used.push(format!("{name} = {default}"));
            default
        })
    }

    let r1_lo = (nf / (nf + 2.0 - a)).max(1.0 / (2.0 - a));
    let r1 = fill(&mut defaults_used, "r1", inputs.r1, 0.5 * (r1_lo + 1.0));
    let r_star = r_star_of(n, a, r1);
    let r_floor = 0.0f64.max(lambda * (3.0 - 2.0 * a) - 1.0);
    let r = fill(&mut defaults_used, "r", inputs.r, 1.0f64.max(lambda * (3.0 - 2.0 * a) - 1.0 + 0.1));
    let r_tilde = r + (r - 1.0 + lambda + a) / (1.0 - a);

    let kt_hi = (1.0 + r_star / 2.0).sqrt();
    let kappa_tilde = fill(&mut defaults_used, "kappa_tilde", inputs.kappa_tilde, 0.5 * (1.0 + kt_hi));
    let p5 = match inputs.p {
        Some(p) => p,
        None => {
            let p = default_p(a, kappa_tilde);
            defaults_used.push(format!("p1..p5 = {p:?}"));
            p
        }
    };
    let p6 = p5[4] * (p5[2] * (2.0 - a) - 1.0) / (1.0 - a);
    let p = [p5[0], p5[1], p5[2], p5[3], p5[4], p6];
    let q = p5.map(|v| v / (v - 1.0));

    let lower = Lower::new(a, lambda, r, r_star, kappa_tilde, &p);
    let alpha0 = fill(&mut defaults_used, "alpha0", inputs.alpha0, 1.25 * lower.iteration().max(lower.linking));
    let beta1 = kappa_tilde * alpha0;
    let alpha = fill(&mut defaults_used, "alpha", inputs.alpha, beta1);

    let theta = big_theta(alpha, r_star, a, lambda, r);
    let mu1 = big_lambda(a, lambda, r, theta);
    let theta_tilde = big_theta(alpha, r_star, a, lambda, r_tilde);
    let mu1_tilde = big_lambda(a, lambda, r_tilde, theta_tilde);
    let mu_min = (lambda + 1.0).max(-mu1).max(-mu1_tilde);
    let mu_max = mu1.max(r_tilde).max(mu1_tilde);
    let m = (alpha + 1.0 - lambda - a) / (2.0 - a);

    let h1 = lambda + 1.0;
    let h2 = 0.0f64
        .max(lambda * (3.0 - 2.0 * a) - 1.0)
        .max((a + lambda - 1.0) / (p[2] * (2.0 - a) - 1.0));
    let h3 = h2.max(1.0 - a - lambda);
    let g = 1.0 + r_star / 2.0;
    let kappa_alpha0 = g + (1.0 - lambda - a) / alpha0;
    let nu1_alpha0 = nu1(alpha0, h1, r_star);
    let nu2_alpha0 = nu2(alpha0, h3, lambda, r_star);

    let caccioppoli = lower.caccioppoli.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let gain = lower.gain[0].max(lower.gain[1]);
    let conditions = vec![
        cond(
            "r1_window",
            nf / (nf + 2.0 - a) < r1 && r1 < 1.0 && 1.0 <= r1 * (2.0 - a) + 1e-12,
            format!("n/(n+2-a) = {} < r1 = {r1} < 1 <= r1(2-a) = {}", nf / (nf + 2.0 - a), r1 * (2.0 - a)),
        ),
        cond("r_lower", r > r_floor, format!("r = {r} > {r_floor}")),
        cond(
            "alpha_weighted",
            alpha > alpha_section3_floor(a, lambda, r, r_star),
            format!("alpha = {alpha} > {}", alpha_section3_floor(a, lambda, r, r_star)),
        ),
        cond(
            "theta_range",
            theta > 0.0 && theta < 1.0 && theta_tilde > 0.0 && theta_tilde < 1.0 && mu1 > -alpha && mu1_tilde > -alpha,
            format!("theta = {theta}, theta~ = {theta_tilde} in (0,1); mu1 = {mu1}, mu1~ = {mu1_tilde} > -alpha"),
        ),
        cond(
            "kappa_window",
            kappa_tilde > 1.0 && kappa_tilde < kt_hi,
            format!("1 < kappa~ = {kappa_tilde} < sqrt(1 + r*/2) = {kt_hi}"),
        ),
        cond(
            "p_choice",
            p5.iter().all(|v| *v > 1.0)
                && p[0] < kappa_tilde
                && p[1] < kappa_tilde
                && p[2] * p[3] < kappa_tilde
                && p6 < kappa_tilde,
            format!("p = {p:?}: p1, p2, p3 p4, p6 < kappa~ = {kappa_tilde}, all > 1"),
        ),
        cond("alpha_caccioppoli", alpha0 > caccioppoli, format!("alpha0 = {alpha0} > {caccioppoli}")),
        cond("alpha_gain", alpha0 > gain, format!("alpha0 = {alpha0} > {gain}")),
        cond(
            "alpha0_iteration",
            alpha0 > lower.iteration(),
            format!("alpha0 = {alpha0} > {}", lower.iteration()),
        ),
        cond("alpha0_linking", alpha0 > lower.linking, format!("alpha0 = {alpha0} > {}", lower.linking)),
    ];
    let failed: Vec<String> =
        conditions.iter().filter(|c| !c.holds).map(|c| format!("{}: {}", c.name, c.detail)).collect();
    if !failed.is_empty() {
        return Err(Error::Inadmissible { conditions: failed });
    }

    Ok(ExponentBook {
        n,
        a,
        lambda,
        r1,
        r_star,
        r,
        r_tilde,
        alpha,
        theta,
        mu1,
        theta_tilde,
        mu1_tilde,
        m,
        mu_min,
        mu_max,
        kappa_tilde,
        alpha0,
        beta1,
        p,
        q,
        h1,
        h2,
        h3,
        kappa_alpha0,
        nu1_alpha0,
        nu2_alpha0,
        conditions,
        defaults_used,
        moser: None,
    })
}

/// `nu1(alpha) = (alpha - h1)/(1 + 1/(alpha (1 + r*/2)))`.
pub fn nu1(alpha: f64, h1: f64, r_star: f64) -> f64 {
    (alpha - h1) / (1.0 + 1.0 / (alpha * (1.0 + r_star / 2.0)))
}

/// `nu2(alpha) = (alpha + h3)/(1 - lambda/(alpha (1 + r*/2)))`.
pub fn nu2(alpha: f64, h3: f64, lambda: f64, r_star: f64) -> f64 {
    (alpha + h3) / (1.0 - lambda / (alpha * (1.0 + r_star / 2.0)))
}

impl ExponentBook {
    /// `beta_j = kappa_tilde^j alpha0`.
    pub fn beta(&self, j: usize) -> f64 {
        self.kappa_tilde.powi(j as i32) * self.alpha0
    }

    pub fn kappa(&self, alpha: f64) -> f64 {
        1.0 + self.r_star / 2.0 + (1.0 - self.lambda - self.a) / alpha
    }

    pub fn nu1(&self, alpha: f64) -> f64 {
        nu1(alpha, self.h1, self.r_star)
    }

    pub fn nu2(&self, alpha: f64) -> f64 {
        nu2(alpha, self.h3, self.lambda, self.r_star)
    }

    /// The same book with the weighted-estimate exponent replaced.
    pub fn with_alpha(&self, alpha: f64) -> Result<ExponentBook> {
        let mut inputs = self.inputs();
        inputs.alpha = Some(alpha);
        let mut book = build_exponents(&inputs)?;
        book.defaults_used.clone_from(&self.defaults_used);
        book.moser.clone_from(&self.moser);
        Ok(book)
    }

    /// Inputs that rebuild this book exactly.
    pub fn inputs(&self) -> ExponentInputs {
        ExponentInputs {
            n: self.n,
            a: self.a,
            lambda: self.lambda,
            r1: Some(self.r1),
            r: Some(self.r),
            alpha: Some(self.alpha),
            alpha0: Some(self.alpha0),
            kappa_tilde: Some(self.kappa_tilde),
            p: Some([self.p[0], self.p[1], self.p[2], self.p[3], self.p[4]]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gas(n: usize, r1: f64, alpha: f64, r: f64) -> ExponentInputs {
        ExponentInputs { r1: Some(r1), r: Some(r), alpha: Some(alpha), ..ExponentInputs::new(n, 0.5, 0.5) }
    }

    #[test]
    fn golden_r_star() {
        let b3 = build_exponents(&gas(3, 0.8, 40.0, 1.0)).unwrap();
        assert!((b3.r_star - 0.25).abs() < 1e-15);
        let b2 = build_exponents(&gas(2, 2.0 / 3.0, 40.0, 1.0)).unwrap();
        assert!((b2.r_star - 0.25).abs() < 1e-15);
    }

    #[test]
    fn ideal_gas_golden_exponents() {
        let b = build_exponents(&gas(2, 2.0 / 3.0, 40.0, 1.0)).unwrap();
        for (got, want) in [
            (b.theta, 0.84),
            (b.mu1, 6.25),
            (b.r_tilde, 3.0),
            (b.theta_tilde, 0.92),
            (b.mu1_tilde, 37.5),
            (b.mu_max, 37.5),
        ] {
            assert!((got - want).abs() < 1e-12 * want.max(1.0), "{got} vs {want}");
        }
        assert_eq!(b.h1, 1.5);
        assert_eq!(b.h2, 0.0);
        assert_eq!(b.h3, 0.0);
        assert!((b.kappa_alpha0 - 1.125).abs() < 1e-15);
    }

    #[test]
    fn low_r1_in_three_dimensions_is_rejected() {
        match build_exponents(&gas(3, 0.5, 40.0, 1.0)) {
            Err(Error::Inadmissible { conditions }) => assert!(conditions[0].starts_with("r1_window")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn named_violations() {
        let mut i = gas(2, 2.0 / 3.0, 40.0, 1.0);
        i.kappa_tilde = Some(1.2);
        let Err(Error::Inadmissible { conditions }) = build_exponents(&i) else { panic!() };
        assert!(conditions.iter().any(|c| c.starts_with("kappa_window")));
        let mut i = gas(2, 2.0 / 3.0, 3.0, 1.0);
        i.alpha0 = Some(2.0);
        let Err(Error::Inadmissible { conditions }) = build_exponents(&i) else { panic!() };
        assert!(conditions.iter().any(|c| c.starts_with("alpha_weighted")));
        assert!(conditions.iter().any(|c| c.starts_with("alpha0_linking")));
        let mut i = gas(2, 2.0 / 3.0, 40.0, 0.0);
        i.r = Some(0.0);
        assert!(build_exponents(&i).is_err());
        assert!(build_exponents(&ExponentInputs::new(4, 0.5, 0.5)).is_err());
        assert!(build_exponents(&ExponentInputs::new(2, 1.0, 0.5)).is_err());
    }

    #[test]
    fn defaults_are_admissible_and_recorded() {
        let b = build_exponents(&ExponentInputs::new(2, 0.5, 0.5)).unwrap();
        assert!(b.conditions.iter().all(|c| c.holds));
        assert_eq!(b.r, 1.0);
        assert!((b.r1 - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(b.alpha, b.beta1);
        assert_eq!(b.defaults_used.len(), 6);
        let again = build_exponents(&b.inputs()).unwrap();
        assert_eq!(again.mu_max, b.mu_max);
    }

    proptest! {
        #[test]
        fn invariants_hold_on_defaults(
            n in 2usize..=3,
            a in 0.05f64..0.95,
            lambda in 0.05f64..3.0,
        ) {
            let b = build_exponents(&ExponentInputs::new(n, a, lambda)).unwrap();
            prop_assert!(b.r_star > 0.0 && b.r_star < 1.0);
            prop_assert!(b.mu_min > 0.0 && b.mu_min < b.alpha);
            prop_assert!(b.mu_max > 0.0);
            prop_assert!(b.kappa_alpha0 > 1.0);
            prop_assert!(b.nu1_alpha0 > 0.0);
            prop_assert_eq!(b.h1, lambda + 1.0);
            for i in 0..5 {
                prop_assert!((1.0 / b.p[i] + 1.0 / b.q[i] - 1.0).abs() <= 1e-15);
            }
            prop_assert_eq!(b.mu_max, b.mu1.max(b.r_tilde).max(b.mu1_tilde));
            prop_assert_eq!(b.mu_min, (lambda + 1.0).max(-b.mu1).max(-b.mu1_tilde));
        }
    }
}
