use super::{BoundaryFace, Grid, SpatialField};
use crate::error::{Error, Result};
use crate::logspace::{log_sum_exp, LogScalar};
use serde::Serialize;

/// Weights smaller than this make negative powers suspect.
const DIVERGENCE_FLOOR: f64 = 1e-300;

/// Sum with a fixed binary-tree order so results do not depend on chunking.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Midpoint rule: `sum_cells f(cell) * cell_volume`.
pub fn integrate_volume(grid: &Grid, f: impl Fn(usize) -> f64) -> Result<f64> {
    let mut vals = Vec::with_capacity(grid.cell_count());
    for c in 0..grid.cell_count() {
        let v = f(c);
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand { cell: c });
        }
        vals.push(v);
    }
    Ok(pairwise_sum(&vals) * grid.cell_volume())
}

/// Face-centre rule on the boundary: `sum_faces f(face, k) * area`.
pub fn integrate_boundary(grid: &Grid, f: impl Fn(&BoundaryFace, usize) -> f64) -> Result<f64> {
    let faces = grid.boundary_faces();
    let mut vals = Vec::with_capacity(faces.len());
    for (k, face) in faces.iter().enumerate() {
        let v = f(face, k);
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand { cell: face.cell });
        }
        vals.push(v * face.area);
    }
    Ok(pairwise_sum(&vals))
}

/// `(integral of |u|^p phi)^(1/p)`.
pub fn weighted_lp_norm(u: &SpatialField, phi: &SpatialField, p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::InvalidInput(format!("norm exponent must be positive, got {p}")));
    }
    u.require_same_grid(phi)?;
    phi.require_positive()?;
    let (uv, pv) = (u.values(), phi.values());
    let s = integrate_volume(u.grid(), |c| uv[c].abs().powf(p) * pv[c])?;
    Ok(s.powf(1.0 / p))
}

/// A weight integral in log form, flagged when tiny weights enter with
/// negative powers and the continuum integral may diverge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlaggedIntegral {
    pub value: LogScalar,
    pub possibly_divergent: bool,
}

/// `integral of prod_i f_i^{q_i}` computed in log space.
///
/// Every factor must be strictly positive, except that zeros are allowed
/// under a positive power.
pub fn log_weight_integral(grid: &Grid, factors: &[(&SpatialField, f64)]) -> Result<FlaggedIntegral> {
    for (f, _) in factors {
        if f.grid() != grid {
            return Err(Error::FieldMismatch(format!("field `{}` is on another grid", f.label())));
        }
    }
    let mut flagged = false;
    let mut logs = Vec::with_capacity(grid.cell_count());
    for c in 0..grid.cell_count() {
        let mut l = 0.0;
        for (f, q) in factors {
            if *q == 0.0 {
                continue;
            }
            let v = f.get(c);
            if v < 0.0 || (v == 0.0 && *q < 0.0) {
                return Err(Error::NonPositiveWeight { field: f.label().to_string(), cell: c, value: v });
            }
            if *q < 0.0 && v < DIVERGENCE_FLOOR {
                flagged = true;
            }
            l += q * v.ln();
        }
        if l.is_nan() {
            return Err(Error::NonFiniteIntegrand { cell: c });
        }
        logs.push(l);
    }
    let ln = log_sum_exp(&logs) + grid.cell_volume().ln();
    Ok(FlaggedIntegral { value: LogScalar::from_ln(ln), possibly_divergent: flagged || ln == f64::INFINITY })
}
