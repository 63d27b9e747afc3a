use crate::error::{Error, Result};
use crate::logspace::LogScalar;
use serde::Serialize;

/// Exponent data shared by the weighted Sobolev, trace and parabolic checks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SobolevParams {
    pub n: usize,
    pub p: f64,
    pub r1: f64,
    pub s: f64,
    pub r: f64,
    pub alpha: f64,
    pub epsilon: f64,
    /// `1 + p/n - 1/r1`.
    pub r_star: f64,
    /// `(alpha - s + p) / p`.
    pub m: f64,
    /// `(alpha + 2r) / (alpha (1 + r*) + 2(p - s))`.
    pub theta: f64,
    /// `(r + theta (s - p)) / (1 - theta)`.
    pub mu1: f64,
    /// Interpolation exponent `theta_0` of the elliptic estimate, tied to
    /// `theta` by `theta = theta_0 (alpha + r) / (alpha - s + p)`.
    pub theta0_interp: f64,
    /// `(rp + s - p) / (p - 1)`, the power shift of the trace estimate.
    pub r_tilde: f64,
    /// `1 + r*/2 + (p - s)/alpha`, the parabolic gain.
    pub kappa: f64,
    /// `1 / (1 + r* alpha / (2 (alpha - s + p)))`, the parabolic interpolation exponent.
    pub theta0: f64,
}

/// Which form of the two-weight trace estimate applies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum TraceBranch {
    NegativeShift,
    NonNegativeShift { theta_tilde: f64, mu1_tilde: f64 },
}

impl SobolevParams {
    /// Builds and validates a parameter set.
    ///
    /// Requires `p > 1`, `n/(n+p) < r1 < 1 <= r1 p < n`, `r >= 0`,
    /// `epsilon > 0`, `alpha >= s`, `alpha > (p-s)/(p-1)`,
    /// `alpha > 2(r+s-p)/r*` and `alpha > 2(s-p)/r*`.
    pub fn new(n: usize, p: f64, r1: f64, s: f64, r: f64, alpha: f64, epsilon: f64) -> Result<Self> {
        let nf = n as f64;
        let mut bad = Vec::new();
        if !(1..=3).contains(&n) {
            bad.push(format!("dimension n = {n} must be 1, 2 or 3"));
        }
        if !(p > 1.0) {
            bad.push(format!("p > 1 (p = {p})"));
        }
        if !(nf / (nf + p) < r1 && r1 < 1.0 && 1.0 <= r1 * p + 1e-12 && r1 * p < nf) {
            bad.push(format!("r1_window: n/(n+p) < r1 < 1 <= r1 p < n (r1 = {r1}, p = {p}, n = {n})"));
        }
        if !(r >= 0.0) {
            bad.push(format!("r >= 0 (r = {r})"));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            bad.push(format!("epsilon > 0 (epsilon = {epsilon})"));
        }
        let r_star = 1.0 + p / nf - 1.0 / r1;
        if !bad.is_empty() {
            return Err(Error::Inadmissible { conditions: bad });
        }
        if !(alpha >= s) {
            bad.push(format!("alpha >= s (alpha = {alpha}, s = {s})"));
        }
        if !(alpha > (p - s) / (p - 1.0)) {
            bad.push(format!("alpha > (p-s)/(p-1) = {}", (p - s) / (p - 1.0)));
        }
        if !(alpha > 2.0 * (r + s - p) / r_star) {
            bad.push(format!("alpha > 2(r+s-p)/r* = {}", 2.0 * (r + s - p) / r_star));
        }
        if !(alpha > 2.0 * (s - p) / r_star) {
            bad.push(format!("alpha > 2(s-p)/r* = {}", 2.0 * (s - p) / r_star));
        }
        if !bad.is_empty() {
            return Err(Error::Inadmissible { conditions: bad });
        }
        let m = (alpha - s + p) / p;
        let theta = (alpha + 2.0 * r) / (alpha * (1.0 + r_star) + 2.0 * (p - s));
        let mu1 = (r + theta * (s - p)) / (1.0 - theta);
        let theta0_interp =
            (alpha - s + p) * (alpha + 2.0 * r) / ((alpha + r) * (alpha * (1.0 + r_star) + 2.0 * (p - s)));
        let r_tilde = (r * p + s - p) / (p - 1.0);
        let kappa = 1.0 + r_star / 2.0 + (p - s) / alpha;
        let theta0 = 1.0 / (1.0 + r_star * alpha / (2.0 * (alpha - s + p)));
        let out = SobolevParams {
            n,
            p,
            r1,
            s,
            r,
            alpha,
            epsilon,
            r_star,
            m,
            theta,
            mu1,
            theta0_interp,
            r_tilde,
            kappa,
            theta0,
        };
        out.check_derived()?;
        Ok(out)
    }

    fn check_derived(&self) -> Result<()> {
        let mut bad = Vec::new();
        let checks = [
            (self.r_star > 0.0 && self.r_star < 1.0, "0 < r* < 1"),
            (self.theta > 0.0 && self.theta < 1.0, "0 < theta < 1"),
            (self.mu1 > -self.alpha, "mu1 > -alpha"),
            (self.m >= 1.0 && self.m < self.alpha, "1 <= m < alpha"),
            (self.theta0 > 0.0 && self.theta0 < 1.0, "0 < theta0 < 1"),
            (self.kappa > 1.0, "kappa > 1"),
        ];
        for (ok, name) in checks {
            if !ok {
                bad.push(name.to_string());
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Inadmissible { conditions: bad })
        }
    }

    /// `(alpha + 2 rho) / (alpha (1 + r*) + 2 (p - s))` for a power shift `rho`.
    pub fn theta_for(&self, rho: f64) -> f64 {
        (self.alpha + 2.0 * rho) / (self.alpha * (1.0 + self.r_star) + 2.0 * (self.p - self.s))
    }

    /// `(rho + theta (s - p)) / (1 - theta)`.
    pub fn mu_for(&self, rho: f64, theta: f64) -> f64 {
        (rho + theta * (self.s - self.p)) / (1.0 - theta)
    }

    /// Selects the trace branch, erroring when its extra condition fails.
    pub fn trace_branch(&self) -> Result<TraceBranch> {
        if self.r_tilde < 0.0 {
            if self.alpha > -self.r_tilde {
                Ok(TraceBranch::NegativeShift)
            } else {
                Err(Error::Inadmissible {
                    conditions: vec![format!("alpha > |r_tilde| = {}", -self.r_tilde)],
                })
            }
        } else {
            let bound = 2.0 * (self.r_tilde + self.s - self.p) / self.r_star;
            if !(self.alpha > bound) {
                return Err(Error::Inadmissible {
                    conditions: vec![format!("alpha > 2(r_tilde+s-p)/r* = {bound}")],
                });
            }
            let theta_tilde = self.theta_for(self.r_tilde);
            let mu1_tilde = self.mu_for(self.r_tilde, theta_tilde);
            if !(theta_tilde > 0.0 && theta_tilde < 1.0 && mu1_tilde > -self.alpha) {
                return Err(Error::Inadmissible { conditions: vec!["0 < theta_tilde < 1, mu1_tilde > -alpha".into()] });
            }
            Ok(TraceBranch::NonNegativeShift { theta_tilde, mu1_tilde })
        }
    }
}

/// `D1(z, eta) = (c4 2^z)^{eta p}`.
pub fn d1(c4: f64, z: f64, eta: f64, p: f64) -> LogScalar {
    (LogScalar::new(c4) * LogScalar::from_ln(z * std::f64::consts::LN_2)).powf(eta * p)
}

/// `D2(z, eta) = (c3 z 2^z)^{eta p / (1 - eta)}`.
pub fn d2(c3: f64, z: f64, eta: f64, p: f64) -> LogScalar {
    (LogScalar::new(c3 * z) * LogScalar::from_ln(z * std::f64::consts::LN_2)).powf(eta * p / (1.0 - eta))
}
