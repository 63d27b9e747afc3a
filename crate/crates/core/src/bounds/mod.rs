//! Explicit a-priori bounds for nonnegative solutions.
//!
//! The pipeline runs in a fixed order:
//!
//! 1. [`build_exponents`] fixes every exponent and checks admissibility;
//! 2. [`moser_products`] adds the infinite products of the `L^infinity` iteration;
//! 3. [`compute_data_integrals`] evaluates the weight and boundary-data integrals;
//! 4. [`compute_zstar`] runs the constant chain of the differential inequality;
//! 5. [`alpha_bound_curve`] turns `Z*` into the weighted bound `V(t)` and its blow-up time;
//! 6. [`linfty_bound`] assembles the `L^infinity` bound on `(epsilon, T)`.
//!
//! [`bound_report`] runs all of it for a [`Scenario`]. Constants are carried as
//! [`LogScalar`] because they routinely overflow `f64`.

mod curve;
mod exponents;
mod gas;
mod integrals;
mod linfty;
mod moser;
mod proof;
mod verify;

pub use curve::{alpha_bound_curve, c_alpha_beta, AlphaCurve, BetaCurve, CURVE_POINTS};
pub use exponents::{big_lambda, big_theta, build_exponents, Condition, ExponentBook, ExponentInputs};
pub use gas::{example_gas_tables, GasInputs, GasRow, GasTable, GOLDEN_TOL};
pub use integrals::{boundary_series, compute_data_integrals, m_series, DataIntegrals};
pub use linfty::{linfty_bound, LinftyReport};
pub use moser::{genn_bound, moser_products, moser_sequences, GennReport, MoserProducts, DEFAULT_TRUNCATION_TOL, MAX_FACTORS};
pub use proof::{compute_zstar, ProofConstants};
pub use verify::{verify_solution_against_bounds, EnergyCheck, VerificationReport, MARGIN_SENTINEL};

use crate::constitutive::compute_weights;
use crate::error::{Error, Result};
use crate::grid::{log_weight_integral, weighted_lp_norm};
use crate::harness::EmbeddingConstants;
use crate::logspace::LogScalar;
use crate::solver::Scenario;
use serde::Serialize;

/// Free parameters of the bound pipeline; `None` takes the default.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundOptions {
    pub r1: Option<f64>,
    pub r: Option<f64>,
    pub alpha0: Option<f64>,
    pub kappa_tilde: Option<f64>,
    pub p: Option<[f64; 5]>,
    /// Start of the `L^infinity` window; defaults to `min(1, T)/2`.
    pub epsilon: Option<f64>,
    /// Exponent of the optional unweighted `L^beta` curve.
    pub beta: Option<f64>,
    pub truncation_tol: f64,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            r1: None,
            r: None,
            alpha0: None,
            kappa_tilde: None,
            p: None,
            epsilon: None,
            beta: None,
            truncation_tol: DEFAULT_TRUNCATION_TOL,
        }
    }
}

impl BoundOptions {
    /// Small shift `r = 0.05` and the smallest default `alpha0`, which keeps
    /// `Z*` and hence the blow-up time within `f64` range for laws with
    /// `lambda (3 - 2a) <= 1`.
    pub fn small_r() -> Self {
        BoundOptions { r: Some(0.05), ..Default::default() }
    }
}

/// Everything computed by [`bound_report`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub book: ExponentBook,
    pub integrals: DataIntegrals,
    pub proof: ProofConstants,
    pub curve: AlphaCurve,
    /// Present when the weighted estimate uses `alpha = beta1`.
    pub linfty: Option<LinftyReport>,
}

/// Runs the whole bound pipeline for a scenario with the given embedding constants.
pub fn bound_report(scenario: &Scenario, consts: &EmbeddingConstants, opts: &BoundOptions) -> Result<BoundReport> {
    let sc = scenario;
    let n = sc.grid.dim();
    if n < 2 {
        return Err(Error::InvalidGrid(format!("bounds need a 2-D or 3-D domain, got dimension {n}")));
    }
    let inputs = ExponentInputs {
        r1: opts.r1,
        r: opts.r,
        alpha: None,
        alpha0: opts.alpha0,
        kappa_tilde: opts.kappa_tilde,
        p: opts.p,
        ..ExponentInputs::new(n, sc.law.degeneracy(), sc.lambda)
    };
    let book = moser_products(&build_exponents(&inputs)?, opts.truncation_tol)?;
    let weights = compute_weights(&sc.law)?;
    let integrals =
        compute_data_integrals(&book, &sc.phi, &weights, sc.law.leading_coefficient(), &sc.psi, sc.t_final)?;
    let proof = compute_zstar(&book, &integrals, sc.z.c_z, consts)?;
    let v0 = LogScalar::ONE.add(log_weight_integral(&sc.grid, &[(&sc.phi, 1.0), (&sc.u0, book.alpha)])?.value);
    let beta = match opts.beta {
        Some(b) => Some((b, c_alpha_beta(&sc.phi, book.alpha, b)?)),
        None => None,
    };
    let curve = alpha_bound_curve(&book, &proof, v0, &integrals.m_series, sc.t_final, beta)?;
    let epsilon = opts.epsilon.unwrap_or(0.5 * sc.t_final.min(1.0));
    let u0_norm = weighted_lp_norm(&sc.u0, &sc.phi, book.beta1)?;
    let linfty = if book.alpha == book.beta1 {
        Some(linfty_bound(&book, &integrals, &proof, &curve, sc.t_final, epsilon, u0_norm)?)
    } else {
        None
    };
    Ok(BoundReport { book, integrals, proof, curve, linfty })
}

/// One candidate of [`optimize_bound_report`]; `ln_linf` is `+inf` when
/// the candidate is inadmissible or not certified.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizeCandidate {
    pub r1: f64,
    pub r: f64,
    pub ln_linf: f64,
}

/// Grid search over `(r1, r)` for the smallest `L^infinity` bound.
///
/// `r1` runs over five interior points of its admissible window and `r`
/// over a fixed ladder above its floor; explicit `r1`/`r` in `opts` pin
/// that coordinate. Returns the best report and every candidate tried.
pub fn optimize_bound_report(
    scenario: &Scenario,
    consts: &EmbeddingConstants,
    opts: &BoundOptions,
) -> Result<(BoundReport, Vec<OptimizeCandidate>)> {
    let n = scenario.grid.dim() as f64;
    let a = scenario.law.degeneracy();
    let lambda = scenario.lambda;
    let r1_lo = (n / (n + 2.0 - a)).max(1.0 / (2.0 - a));
    let r1s: Vec<f64> = match opts.r1 {
        Some(v) => vec![v],
        None => (1..=5).map(|i| r1_lo + (1.0 - r1_lo) * i as f64 / 6.0).collect(),
    };
    let floor = 0.0f64.max(lambda * (3.0 - 2.0 * a) - 1.0);
    let rs: Vec<f64> = match opts.r {
        Some(v) => vec![v],
        None => [0.05, 0.2, 0.5, 1.0, 2.0].iter().map(|d| floor + d).collect(),
    };
    let mut best: Option<BoundReport> = None;
    let mut tried = Vec::new();
    for &r1 in &r1s {
        for &r in &rs {
            let o = BoundOptions { r1: Some(r1), r: Some(r), ..opts.clone() };
            let ln_linf = match bound_report(scenario, consts, &o) {
                Ok(rep) => {
                    let l = rep.ln_linf();
                    if best.as_ref().is_none_or(|b| l < b.ln_linf()) {
                        best = Some(rep);
                    }
                    l
                }
                Err(_) => f64::INFINITY,
            };
            tried.push(OptimizeCandidate { r1, r, ln_linf });
        }
    }
    match best {
        Some(rep) => Ok((rep, tried)),
        None => bound_report(scenario, consts, opts).map(|rep| (rep, tried)),
    }
}

impl BoundReport {
    /// `ln` of the `L^infinity` bound, `+inf` when absent or not certified.
    pub fn ln_linf(&self) -> f64 {
        self.linfty.as_ref().map_or(f64::INFINITY, |l| l.lb2.ln())
    }

    pub fn linf_bound(&self) -> LogScalar {
        LogScalar::from_ln(self.ln_linf())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts() -> EmbeddingConstants {
        EmbeddingConstants::user_supplied([1.0; 7]).unwrap()
    }

    fn certified_reference() -> (Scenario, BoundReport) {
        let probe = bound_report(&Scenario::reference(8, 0.5, 1.0).unwrap(), &consts(), &BoundOptions::small_r()).unwrap();
        let sc = Scenario::reference(8, 0.5, 0.5 * probe.curve.t_threshold).unwrap();
        let rep = bound_report(&sc, &consts(), &BoundOptions::small_r()).unwrap();
        (sc, rep)
    }

    #[test]
    fn reference_report_is_consistent() {
        let (_, rep) = certified_reference();
        assert_eq!(rep.book.alpha, rep.book.beta1);
        assert!(rep.linfty.as_ref().unwrap().certified);
        assert!(rep.curve.v0.ln() > 0.0);
        assert_eq!(rep.integrals.psi_t, LogScalar::ONE);
        assert_eq!(rep.book.defaults_used.iter().filter(|d| d.starts_with("r =")).count(), 0);
    }

    #[test]
    fn optimized_bound_is_no_worse_than_default() {
        let (sc, rep) = certified_reference();
        let (best, tried) = optimize_bound_report(&sc, &consts(), &BoundOptions { r: None, ..Default::default() }).unwrap();
        assert_eq!(tried.len(), 25);
        assert!(tried.iter().any(|c| (c.r - 0.05).abs() < 1e-15 && (c.r1 - rep.book.r1).abs() < 1e-12));
        assert!(best.ln_linf() <= rep.ln_linf());
        let (pinned, tried) = optimize_bound_report(&sc, &consts(), &BoundOptions::small_r()).unwrap();
        assert_eq!(tried.len(), 5);
        assert_eq!(pinned.book.r, 0.05);
    }

    #[test]
    fn one_dimensional_grids_are_rejected() {
        let sc = common_1d();
        assert!(matches!(bound_report(&sc, &consts(), &BoundOptions::default()), Err(Error::InvalidGrid(_))));
    }

    fn common_1d() -> Scenario {
        use crate::grid::{BoundaryField, Grid, SpatialField};
        use crate::solver::ZSpec;
        let g = Grid::unit(1, 8).unwrap();
        let law = crate::constitutive::ForchheimerLaw::new(
            vec![0.0, 1.0],
            vec![SpatialField::constant(g, 1.0, "a0"), SpatialField::constant(g, 1.0, "a1")],
        )
        .unwrap();
        let one = SpatialField::constant(g, 1.0, "one");
        Scenario::new(law, one.clone(), 0.5, ZSpec::none(), BoundaryField::constant(g, 0.0), one, 1.0, None).unwrap()
    }
}
