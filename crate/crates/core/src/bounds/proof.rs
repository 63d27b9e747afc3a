use super::exponents::ExponentBook;
use super::integrals::DataIntegrals;
use crate::error::{Error, Result};
use crate::harness::{d1, d2, EmbeddingConstants};
use crate::logspace::LogScalar;
use serde::Serialize;

/// Intermediate constants of the differential inequality and the
/// `L^infinity` iteration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProofConstants {
    pub c_z: f64,
    /// `c1..c7` as used.
    pub embedding: [f64; 7],
    /// `2^{a-1}`.
    pub c0: f64,
    /// `(2^{1-a} C_Z)^{2-a}`.
    pub big_c1: LogScalar,
    /// `(2 C1)^{(alpha + r)/(r - lambda(3-2a) + 1)}`.
    pub big_c2: LogScalar,
    pub eps2: f64,
    pub eps3: f64,
    pub d1_theta: LogScalar,
    pub d2_theta: LogScalar,
    pub d1_theta_tilde: LogScalar,
    pub d2_theta_tilde: LogScalar,
    /// `G1, G2, G3 (= G4), G5`.
    pub g: [LogScalar; 4],
    /// `Phi1 (= Phi3), Phi2 (= Phi4), Phi6, Phi7`.
    pub phi: [LogScalar; 4],
    pub z1: LogScalar,
    pub z2: LogScalar,
    pub z3: LogScalar,
    pub z4: LogScalar,
    /// `(alpha/lambda) max(1, Z4, C2 (alpha - lambda) K5)`.
    pub z_star: LogScalar,
    pub c8: LogScalar,
    pub c9: LogScalar,
    pub c10: LogScalar,
    pub c11: LogScalar,
    /// `Chat0, Chat1, Chat2`, present once the iteration products are known.
    pub chat: Option<[LogScalar; 3]>,
}

fn ls(v: f64) -> LogScalar {
    LogScalar::new(v)
}

fn pow2(e: f64) -> LogScalar {
    LogScalar::from_ln(e * std::f64::consts::LN_2)
}

/// Runs the constant chain of the differential inequality for `alpha = book.alpha`.
pub fn compute_zstar(
    book: &ExponentBook,
    integrals: &DataIntegrals,
    c_z: f64,
    consts: &EmbeddingConstants,
) -> Result<ProofConstants> {
    if integrals.alpha != book.alpha || integrals.r != book.r || integrals.r1 != book.r1 {
        return Err(Error::InvalidInput(format!(
            "integrals were built for (alpha, r, r1) = ({}, {}, {}), the book has ({}, {}, {})",
            integrals.alpha, integrals.r, integrals.r1, book.alpha, book.r, book.r1
        )));
    }
    if !(c_z.is_finite() && c_z >= 0.0) {
        return Err(Error::InvalidInput(format!("C_Z must be >= 0, got {c_z}")));
    }
    let ExponentBook { a, lambda, alpha, r, r1, r_star, theta, mu1, theta_tilde: tt, mu1_tilde, m, p, .. } = *book;
    let [_, _, c3, c4, c5, c6, c7] = consts.as_array();
    let pp = 2.0 - a;
    let k = |i| integrals.k(i);

    let c0 = 2f64.powf(a - 1.0);
    let big_c1 = (pow2(1.0 - a) * ls(c_z)).powf(pp);
    let big_c2 = (big_c1 * 2.0).powf((alpha + r) / (r - lambda * (3.0 - 2.0 * a) + 1.0));
    let eps2 = c0 / 8.0;
    let eps3 = c0 * (alpha - lambda) / 24.0;

    let g1 = k(2).powf((alpha * (1.0 - a) - 1.0 + lambda + a) / alpha);
    let g2 = k(4).powf((1.0 - r1) / r1);
    let g3 = k(1).powf(1.0 + mu1 / alpha);
    let g5 = k(6).powf(1.0 + mu1_tilde / alpha);
    let phi1 = g1.powf(theta) * g3.powf(1.0 - theta);
    let phi2 = g2.powf(theta / (1.0 - theta)) * g3;
    let phi6 = g1.powf(tt) * g5.powf(1.0 - tt);
    let phi7 = g2.powf(tt / (1.0 - tt)) * g5;

    let d1t = d1(c4, m, theta, pp);
    let d2t = d2(c3, m, theta, pp);
    let d1tt = d1(c4, m, tt, pp);
    let d2tt = d2(c3, m, tt, pp);

    let z1 = (d1t * phi1).max(ls(eps2).powf(-theta / (1.0 - theta)) * d2t * phi2);
    let z2 = k(3).powf((lambda + 1.0) / alpha);
    let trace = ls(c6 * (alpha + r));
    let q = pp / (1.0 - a);
    let z3 = (ls(c5) * d1t * phi1)
        .max(ls(eps3).powf(-theta / (1.0 - theta)) * ls(c5).powf(1.0 / (1.0 - theta)) * d2t * phi2)
        .max(ls(eps3).powf(-1.0 / (1.0 - a)) * trace.powf(q) * d1tt * phi6)
        .max(
            ls(eps3).powf(-(1.0 / (1.0 - a) + q * tt / (1.0 - tt))) * trace.powf(q / (1.0 - tt)) * d2tt * phi7,
        );
    let am = alpha - lambda;
    let z4 = LogScalar::sum([(z1 * am).add(z3) * 2.0, z2 * (0.5 * am), z3 * 2.0]);
    let z_star = ls(alpha / lambda) * LogScalar::ONE.max(z4).max(big_c2 * am * k(5));

    let c10 = ls(20.0)
        * (big_c1 * 2.0)
            .max(ls(4.0 * lambda))
            .max(ls(c5).powf(1.0 / p[2]))
            .max((ls(4.0) * ls(2.0 * c6 * p[2]).powf(pp)).powf(1.0 / (p[2] * pp - 1.0)));
    let c8 = c10 / ls(lambda);
    let c9 = c10 * 8.0;
    let c11 = pow2(4.0 + r_star) * LogScalar::ONE.max(ls(c7).powf(pp)) * c8.max(c9).powf(1.0 + r_star / 2.0);

    let chat = book.moser.as_ref().map(|mp| {
        let base = pow2(2.0 + r_star / 2.0) * c11 * ls(book.beta1).powf(3.0 * (3.0 - 2.0 * a) / (2.0 * (1.0 - a)));
        let chat0 = base.powf(mp.omega);
        let chat1 = pow2(mp.omega2) * chat0;
        let chat2 = pow2(mp.nu_tilde / book.beta1) * chat1;
        [chat0, chat1, chat2]
    });

    Ok(ProofConstants {
        c_z,
        embedding: consts.as_array(),
        c0,
        big_c1,
        big_c2,
        eps2,
        eps3,
        d1_theta: d1t,
        d2_theta: d2t,
        d1_theta_tilde: d1tt,
        d2_theta_tilde: d2tt,
        g: [g1, g2, g3, g5],
        phi: [phi1, phi2, phi6, phi7],
        z1,
        z2,
        z3,
        z4,
        z_star,
        c8,
        c9,
        c10,
        c11,
        chat,
    })
}
