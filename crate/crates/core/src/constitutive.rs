//! Generalized Forchheimer law and its inverse.
//!
//! The law is `g(x, s) = sum_i a_i(x) s^{alpha_i}` with `0 = alpha_0 < ... <
//! alpha_N`. Inverting `s g(x, s) = xi` gives the permeability
//! `K(x, xi) = 1 / g(x, s(x, xi))` and the Darcy-like flux map
//! `X(x, y) = K(x, |y|) y`. All sandwich estimates are stated in terms of
//! the degeneracy exponent `a = alpha_N / (alpha_N + 1)` and the weight
//! fields `W1`, `W2`, `W3` computed by [`compute_weights`].

use crate::error::{Error, Result};
use crate::fieldspec::FieldSpec;
use crate::grid::{Grid, SpatialField};

pub const ROOT_TOL: f64 = 1e-14;
pub const ROOT_MAX_ITER: usize = 200;

/// Exponents of a law: `alpha_0 = 0 < alpha_1 < ... < alpha_N`, `N >= 1`.
fn validate_exponents(exps: &[f64]) -> Result<()> {
    if exps.len() < 2 {
        return Err(Error::InvalidLaw(format!("need at least two terms, got {}", exps.len())));
    }
    if exps[0] != 0.0 {
        return Err(Error::InvalidLaw(format!("first exponent must be 0, got {}", exps[0])));
    }
    if exps.iter().any(|e| !e.is_finite()) || exps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidLaw(format!("exponents must increase strictly: {exps:?}")));
    }
    Ok(())
}

/// The law at a single point (cell or face).
#[derive(Clone, Copy, Debug)]
pub struct PointLaw<'a> {
    pub exponents: &'a [f64],
    pub coefficients: &'a [f64],
}

impl<'a> PointLaw<'a> {
    pub fn new(exponents: &'a [f64], coefficients: &'a [f64]) -> Result<Self> {
        validate_exponents(exponents)?;
        if coefficients.len() != exponents.len() {
            return Err(Error::InvalidLaw("one coefficient per exponent required".into()));
        }
        let n = coefficients.len() - 1;
        if coefficients.iter().any(|c| !(c.is_finite() && *c >= 0.0)) || coefficients[0] <= 0.0 || coefficients[n] <= 0.0 {
            return Err(Error::InvalidLaw(format!(
                "coefficients must be nonnegative with a_0, a_N > 0: {coefficients:?}"
            )));
        }
        Ok(PointLaw { exponents, coefficients })
    }

    pub fn degeneracy(&self) -> f64 {
        let top = *self.exponents.last().unwrap();
        top / (top + 1.0)
    }

    pub fn g(&self, s: f64) -> f64 {
        self.exponents.iter().zip(self.coefficients).map(|(e, a)| a * s.powf(*e)).sum()
    }

    /// `s g(s)` and its derivative `sum_i a_i (alpha_i + 1) s^alpha_i`.
    fn sg_and_slope(&self, s: f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut d = 0.0;
        for (e, a) in self.exponents.iter().zip(self.coefficients) {
            let p = a * s.powf(*e);
            v += p * s;
            d += p * (e + 1.0);
        }
        (v, d)
    }

    fn is_quadratic(&self) -> bool {
        self.exponents.len() == 2 && self.exponents[1] == 1.0
    }

    /// Closed-form root of `a_1 s^2 + a_0 s = xi` (only for `g = a_0 + a_1 s`).
    pub fn solve_s_quadratic(&self, xi: f64) -> f64 {
        let (a0, a1) = (self.coefficients[0], self.coefficients[1]);
        2.0 * xi / (a0 + (a0 * a0 + 4.0 * a1 * xi).sqrt())
    }

    /// Root `s >= 0` of `s g(s) = xi`; quadratic laws use the closed form.
    pub fn solve_s(&self, xi: f64) -> std::result::Result<f64, f64> {
        if self.is_quadratic() {
            return Ok(self.solve_s_quadratic(xi));
        }
        self.solve_s_bracketed(xi, ROOT_TOL, ROOT_MAX_ITER)
    }

    /// Safeguarded Newton on `s g(s) - xi` over
    /// `[0, min(xi / a_0, (xi / a_N)^{1/(alpha_N+1)})]`.
    ///
    /// Iterates until the Newton step stalls at rounding level, then accepts
    /// the best iterate if `|s g(s) - xi| <= tol (1 + xi)`. On failure the
    /// best residual found is returned as the error.
    pub fn solve_s_bracketed(&self, xi: f64, tol: f64, max_iter: usize) -> std::result::Result<f64, f64> {
        if !(xi.is_finite() && xi >= 0.0) {
            return Err(f64::NAN);
        }
        if xi == 0.0 {
            return Ok(0.0);
        }
        let n = self.exponents.len() - 1;
        let upper_a0 = xi / self.coefficients[0];
        let upper_an = (xi / self.coefficients[n]).powf(1.0 / (self.exponents[n] + 1.0));
        let mut lo = 0.0;
        let mut hi = upper_a0.min(upper_an);
        let target = tol * (1.0 + xi);
        let mut s = hi;
        let mut best = (f64::INFINITY, s);
        for _ in 0..max_iter {
            let (v, d) = self.sg_and_slope(s);
            let f = v - xi;
            if f.abs() < best.0 {
                best = (f.abs(), s);
            }
            if f == 0.0 {
                break;
            }
            if f > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let step = f / d;
            let newton = s - step;
            if step.abs() <= 2.0 * f64::EPSILON * s || hi - lo <= f64::EPSILON * hi {
                if newton > lo && newton < hi {
                    let r = (self.sg_and_slope(newton).0 - xi).abs();
                    if r < best.0 {
                        best = (r, newton);
                    }
                }
                break;
            }
            s = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        }
        if best.0 <= target {
            Ok(best.1)
        } else {
            Err(best.0)
        }
    }

    /// `K(xi) = 1 / g(s(xi))`.
    pub fn permeability(&self, xi: f64) -> std::result::Result<f64, f64> {
        Ok(1.0 / self.g(self.solve_s(xi)?))
    }

    /// `X(y) = K(|y|) y`.
    pub fn flux(&self, y: [f64; 3]) -> std::result::Result<[f64; 3], f64> {
        let norm = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
        let k = self.permeability(norm)?;
        Ok([k * y[0], k * y[1], k * y[2]])
    }

    /// `ds/dxi = 1 / (g(s) + s g'(s))`.
    pub fn ds_dxi(&self, xi: f64) -> std::result::Result<f64, f64> {
        let s = self.solve_s(xi)?;
        Ok(1.0 / self.sg_and_slope(s).1)
    }

    /// Pointwise weights `(W1, W2)`.
    pub fn weights(&self) -> (f64, f64) {
        let n = self.coefficients.len() - 1;
        let a = self.degeneracy();
        let an = self.coefficients[n];
        let m_upper = self.coefficients.iter().copied().fold(0.0, f64::max);
        let m_lower = self.coefficients[0].min(an);
        let w1 = an.powf(a) / (2.0 * n as f64 * m_upper);
        let w2 = n as f64 * m_upper / (an.powf(1.0 - a) * m_lower);
        (w1, w2)
    }
}

/// A law with cell-wise coefficient fields.
#[derive(Clone, Debug)]
pub struct ForchheimerLaw {
    exponents: Vec<f64>,
    coefficients: Vec<SpatialField>,
    packed: Vec<f64>,
}

impl ForchheimerLaw {
    pub fn new(exponents: Vec<f64>, coefficients: Vec<SpatialField>) -> Result<Self> {
        validate_exponents(&exponents)?;
        if coefficients.len() != exponents.len() {
            return Err(Error::InvalidLaw(format!(
                "{} coefficient fields for {} exponents",
                coefficients.len(),
                exponents.len()
            )));
        }
        for c in &coefficients[1..] {
            coefficients[0].require_same_grid(c)?;
        }
        let n = exponents.len() - 1;
        coefficients[0].require_positive()?;
        coefficients[n].require_positive()?;
        for c in &coefficients {
            if let Some(cell) = c.values().iter().position(|&v| v < 0.0) {
                return Err(Error::NonPositiveWeight { field: c.label().into(), cell, value: c.get(cell) });
            }
        }
        let cells = coefficients[0].grid().cell_count();
        let mut packed = Vec::with_capacity(cells * (n + 1));
        for cell in 0..cells {
            packed.extend(coefficients.iter().map(|f| f.get(cell)));
        }
        Ok(ForchheimerLaw { exponents, coefficients, packed })
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn coefficients(&self) -> &[SpatialField] {
        &self.coefficients
    }

    pub fn terms(&self) -> usize {
        self.exponents.len() - 1
    }

    pub fn grid(&self) -> &Grid {
        self.coefficients[0].grid()
    }

    /// `a = alpha_N / (alpha_N + 1)`.
    pub fn degeneracy(&self) -> f64 {
        let top = *self.exponents.last().unwrap();
        top / (top + 1.0)
    }

    pub fn leading_coefficient(&self) -> &SpatialField {
        self.coefficients.last().unwrap()
    }

    pub fn at(&self, cell: usize) -> PointLaw<'_> {
        let k = self.exponents.len();
        PointLaw { exponents: &self.exponents, coefficients: &self.packed[cell * k..(cell + 1) * k] }
    }

    /// `s(x, xi)` at a cell.
    pub fn solve_s(&self, cell: usize, xi: f64) -> Result<f64> {
        self.at(cell)
            .solve_s(xi)
            .map_err(|residual| Error::RootNotConverged { cell, xi, residual })
    }

    /// `K(x, xi)` at a cell.
    pub fn eval_k(&self, cell: usize, xi: f64) -> Result<f64> {
        Ok(1.0 / self.at(cell).g(self.solve_s(cell, xi)?))
    }

    /// `X(x, y)` at a cell.
    pub fn eval_x(&self, cell: usize, y: [f64; 3]) -> Result<[f64; 3]> {
        let norm = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
        let k = self.eval_k(cell, norm)?;
        Ok([k * y[0], k * y[1], k * y[2]])
    }
}

/// Coefficient-derived weight fields.
#[derive(Clone, Debug)]
pub struct WeightFields {
    /// `max_j a_j`.
    pub m_upper: SpatialField,
    /// `min(a_0, a_N)`.
    pub m_lower: SpatialField,
    pub w1: SpatialField,
    pub w2: SpatialField,
    /// `W1 + W2^{2-a} / W1^{1-a}`.
    pub w3: SpatialField,
}

pub fn compute_weights(law: &ForchheimerLaw) -> Result<WeightFields> {
    let grid = *law.grid();
    let a = law.degeneracy();
    let cells = grid.cell_count();
    let mut m_upper = Vec::with_capacity(cells);
    let mut m_lower = Vec::with_capacity(cells);
    let mut w1 = Vec::with_capacity(cells);
    let mut w2 = Vec::with_capacity(cells);
    let mut w3 = Vec::with_capacity(cells);
    for c in 0..cells {
        let p = law.at(c);
        let n = p.coefficients.len() - 1;
        m_upper.push(p.coefficients.iter().copied().fold(0.0, f64::max));
        m_lower.push(p.coefficients[0].min(p.coefficients[n]));
        let (a1, a2) = p.weights();
        w1.push(a1);
        w2.push(a2);
        w3.push(a1 + a2.powf(2.0 - a) / a1.powf(1.0 - a));
    }
    Ok(WeightFields {
        m_upper: SpatialField::new(grid, m_upper, "M_upper")?,
        m_lower: SpatialField::new(grid, m_lower, "m_lower")?,
        w1: SpatialField::new(grid, w1, "W1")?,
        w2: SpatialField::new(grid, w2, "W2")?,
        w3: SpatialField::new(grid, w3, "W3")?,
    })
}

/// Named law families with field-valued coefficients.
#[derive(Clone, Debug, PartialEq)]
pub enum LawPreset {
    /// `g = a + b s`.
    TwoTerm { a: FieldSpec, b: FieldSpec },
    /// `g = a + b s + c s^2`.
    ThreeTerm { a: FieldSpec, b: FieldSpec, c: FieldSpec },
    /// `g = a + d s^{m-1}` with `1 < m < 2`.
    PowerLaw { a: FieldSpec, d: FieldSpec, m: f64 },
    Custom { exponents: Vec<f64>, coefficients: Vec<FieldSpec> },
}

impl LawPreset {
    pub fn exponents(&self) -> Vec<f64> {
        match self {
            LawPreset::TwoTerm { .. } => vec![0.0, 1.0],
            LawPreset::ThreeTerm { .. } => vec![0.0, 1.0, 2.0],
            LawPreset::PowerLaw { m, .. } => vec![0.0, m - 1.0],
            LawPreset::Custom { exponents, .. } => exponents.clone(),
        }
    }
}

pub fn preset_law(preset: &LawPreset, grid: &Grid, base_dir: Option<&std::path::Path>) -> Result<ForchheimerLaw> {
    let specs: Vec<&FieldSpec> = match preset {
        LawPreset::TwoTerm { a, b } => vec![a, b],
        LawPreset::ThreeTerm { a, b, c } => vec![a, b, c],
        LawPreset::PowerLaw { a, d, m } => {
            if !(*m > 1.0 && *m < 2.0) {
                return Err(Error::InvalidLaw(format!("power-law exponent m must lie in (1, 2), got {m}")));
            }
            vec![a, d]
        }
        LawPreset::Custom { coefficients, .. } => coefficients.iter().collect(),
    };
    let fields = specs
        .iter()
        .enumerate()
        .map(|(i, s)| s.to_field(grid, &format!("a{i}"), base_dir))
        .collect::<Result<Vec<_>>>()?;
    ForchheimerLaw::new(preset.exponents(), fields)
}

/// `lambda = 1 / (gamma + 1)` for a gas with polytropic exponent `gamma >= 1`.
pub fn lambda_from_gamma(gamma: f64) -> Result<f64> {
    if !(gamma.is_finite() && gamma >= 1.0) {
        return Err(Error::InvalidInput(format!("gamma must be at least 1, got {gamma}")));
    }
    Ok(1.0 / (gamma + 1.0))
}
