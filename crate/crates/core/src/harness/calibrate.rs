use super::family::{SampledFunction, TestFunction, TestFunctionFamily};
use crate::error::{Error, Result};
use crate::grid::{integrate_boundary, integrate_volume, Grid};
use serde::Serialize;

pub const DEFAULT_SAFETY_FACTOR: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Provenance {
    Calibrated { seed: u64, family_size: usize, cells: Vec<usize>, p: f64, r1: f64 },
    UserSupplied,
}

/// Embedding and trace constants used by the weighted inequalities.
///
/// * `c1, c2`: `||f||_{p*} <= c1 ||grad f||_p + c2 ||f||_1`, `p* = np/(n-p)`.
/// * `c3, c4`: the same pair at exponent `r1 p`.
/// * `c5, c6`: `int_Gamma |f| <= c5 int |f| + c6 int |grad f|`.
/// * `c7`: `||f||_{q*} <= c7 (int |grad f|^q + int |f|^q)^{1/q}` at `q = r1 p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    pub c7: f64,
    pub safety_factor: f64,
    pub provenance: Provenance,
}

impl EmbeddingConstants {
    pub fn user_supplied(c: [f64; 7]) -> Result<Self> {
        if let Some(i) = c.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidInput(format!("constant c{} must be positive, got {}", i + 1, c[i])));
        }
        Ok(EmbeddingConstants {
            c1: c[0],
            c2: c[1],
            c3: c[2],
            c4: c[3],
            c5: c[4],
            c6: c[5],
            c7: c[6],
            safety_factor: 1.0,
            provenance: Provenance::UserSupplied,
        })
    }

    pub fn as_array(&self) -> [f64; 7] {
        [self.c1, self.c2, self.c3, self.c4, self.c5, self.c6, self.c7]
    }

    /// All constants multiplied by `factor` (used to sabotage a suite on purpose).
    pub fn scaled(&self, factor: f64) -> Self {
        let c = self.as_array().map(|v| v * factor);
        EmbeddingConstants { c1: c[0], c2: c[1], c3: c[2], c4: c[3], c5: c[4], c6: c[5], c7: c[6], ..self.clone() }
    }
}

/// One sample of an inequality `lhs <= c_grad * grad + c_off * base`.
#[derive(Clone, Copy, Debug)]
struct Sample {
    lhs: f64,
    grad: f64,
    base: f64,
}

/// Smallest `c_grad` above a floor; applies when the family does not constrain it.
const GRAD_CONSTANT_FLOOR: f64 = 1e-12;

/// Two-stage fit: the offset constant is forced by gradient-free members,
/// then the gradient constant is the largest residual ratio of the rest.
fn fit_pair(samples: &[Sample]) -> Result<(f64, f64)> {
    let flat = |s: &Sample| s.grad <= 1e-12 * (s.lhs + s.base);
    let c_off = samples
        .iter()
        .filter(|s| flat(s) && s.base > 0.0)
        .map(|s| s.lhs / s.base)
        .fold(0.0, f64::max);
    let varying: Vec<&Sample> = samples.iter().filter(|s| !flat(s)).collect();
    if varying.is_empty() {
        return Err(Error::DegenerateFamily("no member has a nonzero gradient".into()));
    }
    let c_grad = varying
        .iter()
        .map(|s| (s.lhs - c_off * s.base).max(0.0) / s.grad)
        .fold(GRAD_CONSTANT_FLOOR, f64::max);
    Ok((c_grad, c_off))
}

fn norm(grid: &Grid, v: impl Fn(usize) -> f64, q: f64) -> Result<f64> {
    Ok(integrate_volume(grid, |c| v(c).abs().powf(q))?.powf(1.0 / q))
}

fn grad_abs(g: &[f64; 3]) -> f64 {
    (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt()
}

struct Measurements {
    pair_p: Sample,
    pair_pbar: Sample,
    trace: Sample,
    c7_ratio: f64,
}

fn measure(grid: &Grid, f: &SampledFunction, p: f64, pbar: f64) -> Result<Measurements> {
    let n = grid.dim() as f64;
    let v = f.values.values();
    let gr = &f.gradients;
    let l1 = norm(grid, |c| v[c], 1.0)?;
    let p_star = n * p / (n - p);
    let pbar_star = n * pbar / (n - pbar);
    let pair_p = Sample { lhs: norm(grid, |c| v[c], p_star)?, grad: norm(grid, |c| grad_abs(&gr[c]), p)?, base: l1 };
    let pair_pbar = Sample {
        lhs: norm(grid, |c| v[c], pbar_star)?,
        grad: norm(grid, |c| grad_abs(&gr[c]), pbar)?,
        base: l1,
    };
    let trace = Sample {
        lhs: integrate_boundary(grid, |_, k| f.boundary[k].abs())?,
        grad: integrate_volume(grid, |c| grad_abs(&gr[c]))?,
        base: l1,
    };
    let full = integrate_volume(grid, |c| grad_abs(&gr[c]).powf(pbar) + v[c].abs().powf(pbar))?.powf(1.0 / pbar);
    let c7_ratio = if full > 0.0 { pair_pbar.lhs / full } else { 0.0 };
    Ok(Measurements { pair_p, pair_pbar, trace, c7_ratio })
}

/// Calibrates all constants on `family` sampled over `grid`, for the
/// gradient exponent `p` and the auxiliary exponent `r1 p`.
///
/// The constant function is always part of the calibration set since it
/// alone determines the offset constants.
pub fn calibrate_constants(grid: &Grid, r1: f64, p: f64, family: &TestFunctionFamily) -> Result<EmbeddingConstants> {
    let n = grid.dim() as f64;
    let pbar = r1 * p;
    if !(p >= 1.0 && p < n) {
        return Err(Error::InvalidInput(format!("calibration needs 1 <= p < n (p = {p}, n = {n})")));
    }
    if !(pbar >= 1.0 - 1e-12 && pbar < n) {
        return Err(Error::InvalidInput(format!("calibration needs 1 <= r1 p < n (r1 p = {pbar})")));
    }
    let pbar = pbar.max(1.0);
    let mut members = family.generate(grid.dim())?;
    if !members.iter().any(TestFunction::is_constant) {
        let mut one = TestFunctionFamily::with_count(1, 0);
        one.include_linear = false;
        one.include_bump = false;
        members.extend(one.generate(grid.dim())?);
    }
    let mut pair_p = Vec::new();
    let mut pair_pbar = Vec::new();
    let mut trace = Vec::new();
    let mut c7: f64 = 0.0;
    for f in &members {
        let m = measure(grid, &f.sample(grid)?, p, pbar)?;
        pair_p.push(m.pair_p);
        pair_pbar.push(m.pair_pbar);
        trace.push(m.trace);
        c7 = c7.max(m.c7_ratio);
    }
    let (c1, c2) = fit_pair(&pair_p)?;
    let (c3, c4) = fit_pair(&pair_pbar)?;
    let (c6, c5) = fit_pair(&trace)?;
    let k = DEFAULT_SAFETY_FACTOR;
    Ok(EmbeddingConstants {
        c1: k * c1,
        c2: k * c2,
        c3: k * c3,
        c4: k * c4,
        c5: k * c5,
        c6: k * c6,
        c7: k * c7,
        safety_factor: k,
        provenance: Provenance::Calibrated {
            seed: family.seed,
            family_size: family.count,
            cells: grid.cells()[..grid.dim()].to_vec(),
            p,
            r1,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_on_unit_square() {
        let g = Grid::unit(2, 24).unwrap();
        let c = calibrate_constants(&g, 2.0 / 3.0, 1.5, &TestFunctionFamily::with_count(12, 5)).unwrap();
        // The constant function forces c2, c4 >= 1 and c5 >= |Gamma|/|U| = 4 before the safety factor.
        assert!(c.c2 >= 2.0 - 1e-12 && c.c4 >= 2.0 - 1e-12);
        assert!((c.c5 - 8.0).abs() < 1e-10);
        assert!(c.c7 >= 2.0 - 1e-12);
        assert!(c.as_array().iter().all(|v| *v > 0.0));
    }

    #[test]
    fn enlarging_the_family_never_lowers_constants() {
        let g = Grid::unit(2, 16).unwrap();
        let small = calibrate_constants(&g, 0.8, 1.5, &TestFunctionFamily::with_count(6, 9)).unwrap();
        let big = calibrate_constants(&g, 0.8, 1.5, &TestFunctionFamily::with_count(20, 9)).unwrap();
        for (a, b) in small.as_array().iter().zip(big.as_array()) {
            assert!(b >= *a);
        }
    }

    #[test]
    fn rejects_supercritical_exponent_and_flat_family() {
        let g = Grid::unit(2, 8).unwrap();
        assert!(calibrate_constants(&g, 0.9, 2.5, &TestFunctionFamily::default()).is_err());
        let mut flat = TestFunctionFamily::with_count(1, 0);
        flat.include_linear = false;
        assert!(matches!(calibrate_constants(&g, 2.0 / 3.0, 1.5, &flat), Err(Error::DegenerateFamily(_))));
    }

    #[test]
    fn user_constants_must_be_positive() {
        assert!(EmbeddingConstants::user_supplied([1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0]).is_err());
        let c = EmbeddingConstants::user_supplied([1.0; 7]).unwrap();
        assert_eq!(c.scaled(0.1).c7, 0.1);
    }
}
