use super::calibrate::{calibrate_constants, EmbeddingConstants};
use super::checks::{
    check_parabolic_sobolev, check_trace_simple, check_trace_two_weight, check_weighted_sobolev, CheckKind,
    CheckOutcome,
};
use super::family::TestFunctionFamily;
use super::params::SobolevParams;
use crate::error::{Error, Result};
use crate::grid::{Grid, SpatialField};
use serde::Serialize;
use std::f64::consts::PI;

/// Where the suite takes its embedding constants from.
#[derive(Clone, Debug)]
pub enum SuiteConstants {
    /// Calibrate once per distinct `(p, r1)` on this family, then multiply by `scale`.
    Calibrated { family: TestFunctionFamily, scale: f64 },
    Fixed(EmbeddingConstants),
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteRecord {
    pub check: CheckKind,
    pub function_id: usize,
    pub param_id: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub ln_lhs: f64,
    pub ln_rhs: f64,
    pub pass: bool,
}

impl SuiteRecord {
    fn from_outcome(o: &CheckOutcome, function_id: usize, param_id: usize) -> Self {
        SuiteRecord {
            check: o.kind,
            function_id,
            param_id,
            lhs: o.lhs.value(),
            rhs: o.rhs.value(),
            margin: o.margin(),
            ln_lhs: o.lhs.ln(),
            ln_rhs: o.rhs.ln(),
            pass: o.passes(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub cells: Vec<usize>,
    pub params: Vec<SobolevParams>,
    pub constants: Vec<EmbeddingConstants>,
    pub records: Vec<SuiteRecord>,
    pub failures: usize,
    /// Smallest `ln(rhs) - ln(lhs)` over all records.
    pub worst_log_margin: f64,
    pub interpretation: String,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.failures == 0
    }
}

/// Times at which the parabolic check samples `u(x, t) = 1 + 0.1 sin(2 pi t) f(x)`.
const PARABOLIC_TIMES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Validates every check's preconditions for one parameter set.
fn validate(p: &SobolevParams) -> Result<()> {
    p.trace_branch()?;
    let need = p.s.max((p.p - p.s) / (p.p - 1.0));
    if p.alpha < need {
        return Err(Error::Inadmissible { conditions: vec![format!("alpha >= max(s, (p-s)/(p-1)) = {need}")] });
    }
    Ok(())
}

/// Runs all four checks on every (function, parameter set) pair.
///
/// A failing record indicts the embedding constants (calibrated on a finite
/// family, or supplied by the user), not the inequality itself.
pub fn run_suite(
    grid: &Grid,
    family: &TestFunctionFamily,
    params: &[SobolevParams],
    phi: &SpatialField,
    w: &SpatialField,
    constants: &SuiteConstants,
) -> Result<SuiteReport> {
    for p in params {
        if p.n != grid.dim() {
            return Err(Error::InvalidInput(format!("parameter set for n = {} on a {}-D grid", p.n, grid.dim())));
        }
        validate(p)?;
    }
    let mut consts: Vec<EmbeddingConstants> = Vec::new();
    let mut keyed: Vec<((f64, f64), usize)> = Vec::new();
    let mut param_const = Vec::with_capacity(params.len());
    for p in params {
        let idx = match &constants {
            SuiteConstants::Fixed(c) => {
                if consts.is_empty() {
                    consts.push(c.clone());
                }
                0
            }
            SuiteConstants::Calibrated { family: cal, scale } => {
                match keyed.iter().find(|(k, _)| *k == (p.p, p.r1)) {
                    Some((_, i)) => *i,
                    None => {
                        consts.push(calibrate_constants(grid, p.r1, p.p, cal)?.scaled(*scale));
                        keyed.push(((p.p, p.r1), consts.len() - 1));
                        consts.len() - 1
                    }
                }
            }
        };
        param_const.push(idx);
    }
    let omega = SpatialField::constant(*grid, 1.0, "omega");
    let members = family.generate(grid.dim())?;
    let mut records = Vec::new();
    for f in &members {
        let u = f.sample(grid)?.values;
        let samples: Vec<(f64, SpatialField)> = PARABOLIC_TIMES
            .iter()
            .map(|&t| Ok((t, u.map("u_t", |v| 1.0 + 0.1 * (2.0 * PI * t).sin() * v)?)))
            .collect::<Result<_>>()?;
        for (pid, p) in params.iter().enumerate() {
            let c = &consts[param_const[pid]];
            let outcomes = [
                check_weighted_sobolev(&u, phi, w, &omega, p, c)?,
                check_trace_simple(&u, w, p, c)?,
                check_trace_two_weight(&u, phi, w, p, c)?,
                check_parabolic_sobolev(&samples, phi, w, p, c)?,
            ];
            records.extend(outcomes.iter().map(|o| SuiteRecord::from_outcome(o, f.id, pid)));
        }
    }
    let failures = records.iter().filter(|r| !r.pass).count();
    let worst_log_margin = records.iter().map(|r| r.ln_rhs - r.ln_lhs).fold(f64::INFINITY, f64::min);
    let interpretation = if failures == 0 {
        "all inequalities hold on the sampled family".to_string()
    } else {
        format!(
            "{failures} record(s) failed; the inequalities are proven, so failures point at the embedding \
             constants (calibration family, resolution or user-supplied values)"
        )
    };
    Ok(SuiteReport {
        cells: grid.cells()[..grid.dim()].to_vec(),
        params: params.to_vec(),
        constants: consts,
        records,
        failures,
        worst_log_margin,
        interpretation,
    })
}

/// Lower bound on `alpha` implied by every check's preconditions.
fn alpha_floor(n: usize, p: f64, r1: f64, s: f64, r: f64) -> f64 {
    let rs = 1.0 + p / n as f64 - 1.0 / r1;
    let rt = (r * p + s - p) / (p - 1.0);
    let branch = if rt < 0.0 { -rt } else { 2.0 * (rt + s - p) / rs };
    [s, (p - s) / (p - 1.0), 2.0 * (r + s - p) / rs, 2.0 * (s - p) / rs, branch, 1.0]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Twelve admissible parameter sets spread over `p`, `s`, `r`, `alpha` and `epsilon`.
pub fn default_parameter_sets(n: usize) -> Result<Vec<SobolevParams>> {
    if !(2..=3).contains(&n) {
        return Err(Error::InvalidInput(format!("no default parameter sets for n = {n}")));
    }
    let nf = n as f64;
    let r1_mid = |p: f64| {
        let lo = (nf / (nf + p)).max(1.0 / p);
        let hi = 1.0f64.min(nf / p);
        0.5 * (lo + hi)
    };
    // (p, s, r, alpha factor over the floor, epsilon); a factor above 10 is an absolute alpha.
    let table: [(f64, f64, f64, f64, f64); 12] = [
        (1.5, 1.5, 1.0, 40.0, 0.1),
        (1.5, 1.5, 0.5, 1.5, 1.0),
        (1.5, 1.2, 0.0, 1.5, 0.5),
        (1.5, 2.0, 0.5, 1.5, 0.1),
        (1.8, 1.8, 1.0, 1.5, 1.0),
        (1.8, 1.3, 0.2, 2.0, 0.3),
        (1.5, 1.5, 0.0, 3.0, 2.0),
        (1.5, 1.0, 0.0, 2.0, 1.0),
        (1.8, 2.2, 0.4, 1.5, 0.5),
        (1.5, 1.5, 1.0, 1.1, 0.05),
        (1.8, 1.8, 0.7, 1.2, 0.7),
        (1.5, 1.2, 0.3, 1.25, 0.2),
    ];
    table
        .iter()
        .map(|&(p, s, r, f, eps)| {
            let r1 = if n == 2 && p == 1.5 { 2.0 / 3.0 } else { r1_mid(p) };
            let alpha = if f > 10.0 { f } else { f * alpha_floor(n, p, r1, s, r) };
            SobolevParams::new(n, p, r1, s, r, alpha, eps)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sets_are_admissible() {
        for n in [2, 3] {
            let sets = default_parameter_sets(n).unwrap();
            assert_eq!(sets.len(), 12);
            for p in &sets {
                validate(p).unwrap();
            }
        }
    }

    #[test]
    fn empty_family_passes_vacuously() {
        let g = Grid::unit(2, 8).unwrap();
        let one = SpatialField::constant(g, 1.0, "one");
        let fam = TestFunctionFamily::with_count(0, 1);
        let c = EmbeddingConstants::user_supplied([1.0; 7]).unwrap();
        let rep = run_suite(&g, &fam, &default_parameter_sets(2).unwrap(), &one, &one, &SuiteConstants::Fixed(c))
            .unwrap();
        assert!(rep.records.is_empty() && rep.all_pass());
    }

    #[test]
    fn small_calibrated_suite_passes() {
        let g = Grid::unit(2, 16).unwrap();
        let one = SpatialField::constant(g, 1.0, "one");
        let fam = TestFunctionFamily::with_count(8, 11);
        let sets = default_parameter_sets(2).unwrap();
        let rep = run_suite(&g, &fam, &sets, &one, &one, &SuiteConstants::Calibrated { family: fam.clone(), scale: 1.0 })
            .unwrap();
        assert_eq!(rep.records.len(), 8 * 12 * 4);
        assert!(rep.all_pass(), "{} failures, worst {}", rep.failures, rep.worst_log_margin);
    }
}
