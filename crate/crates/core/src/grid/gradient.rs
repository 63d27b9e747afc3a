use super::{FaceField, FaceGradients, Grid, Side, SpatialField};
use crate::error::{Error, Result};
use super::quadrature::pairwise_sum;

/// Gradient of cell data at one face normal to `axis`.
///
/// The normal component is the two-point difference across the face
/// (one-sided at the boundary). Each tangential component averages the
/// parallel differences available around the adjacent cells.
pub(crate) fn face_gradient(grid: &Grid, u: &[f64], axis: usize, face: usize) -> [f64; 3] {
    let (lo, hi) = grid.face_cells(axis, face);
    let h = grid.spacing(axis);
    let mut g = [0.0; 3];
    g[axis] = match (lo, hi) {
        (Some(l), Some(r)) => (u[r] - u[l]) / h,
        (None, Some(r)) => grid.neighbor(r, axis, 1).map_or(0.0, |n| (u[n] - u[r]) / h),
        (Some(l), None) => grid.neighbor(l, axis, -1).map_or(0.0, |n| (u[l] - u[n]) / h),
        (None, None) => 0.0,
    };
    for j in (0..grid.dim()).filter(|&j| j != axis) {
        let hj = grid.spacing(j);
        let mut acc = 0.0;
        let mut count = 0usize;
        for c in [lo, hi].into_iter().flatten() {
            if let Some(n) = grid.neighbor(c, j, 1) {
                acc += (u[n] - u[c]) / hj;
                count += 1;
            }
            if let Some(n) = grid.neighbor(c, j, -1) {
                acc += (u[c] - u[n]) / hj;
                count += 1;
            }
        }
        if count > 0 {
            g[j] = acc / count as f64;
        }
    }
    g
}

fn require_two_cells(grid: &Grid) -> Result<()> {
    for k in 0..grid.dim() {
        if grid.cells_along(k) < 2 {
            return Err(Error::InvalidGrid(format!(
                "discrete gradients need at least 2 cells along axis {k}"
            )));
        }
    }
    Ok(())
}

/// Gradients at every face of the grid.
pub fn discrete_gradient(u: &SpatialField) -> Result<FaceGradients> {
    let grid = *u.grid();
    require_two_cells(&grid)?;
    let per_axis = (0..grid.dim())
        .map(|k| (0..grid.face_count(k)).map(|f| face_gradient(&grid, u.values(), k, f)).collect())
        .collect();
    Ok(FaceGradients { grid, per_axis })
}

/// Cell divergence of normal face fluxes: `sum_k (F_hi - F_lo) / h_k`.
pub fn divergence(flux: &FaceField) -> Result<SpatialField> {
    let grid = flux.grid;
    let mut div = vec![0.0; grid.cell_count()];
    for (c, d) in div.iter_mut().enumerate() {
        for k in 0..grid.dim() {
            let hi = flux.per_axis[k][grid.cell_face(c, k, Side::Hi)];
            let lo = flux.per_axis[k][grid.cell_face(c, k, Side::Lo)];
            *d += (hi - lo) / grid.spacing(k);
        }
    }
    SpatialField::new(grid, div, "divergence")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradEnergy {
    pub value: f64,
    /// Set when `|u|` vanished at a face under a negative power and was floored.
    pub degenerate: bool,
}

/// Face quadrature of `|u|^(alpha-s) |grad u|^p W`.
///
/// Faces normal to each axis carry a trapezoid weight (full cell volume
/// inside, half on the boundary); the per-axis sums are averaged. Face values
/// of `|u|` and `W` are the means of the adjacent cells.
pub fn grad_energy(u: &SpatialField, w: &SpatialField, alpha: f64, s: f64, p: f64) -> Result<GradEnergy> {
    u.require_same_grid(w)?;
    if !(p.is_finite() && p > 0.0 && alpha.is_finite() && s.is_finite()) {
        return Err(Error::InvalidInput(format!("bad energy exponents alpha={alpha}, s={s}, p={p}")));
    }
    let grid = *u.grid();
    require_two_cells(&grid)?;
    let (uv, wv) = (u.values(), w.values());
    let vol = grid.cell_volume();
    let e = alpha - s;
    let mut degenerate = false;
    let mut axis_sums = Vec::with_capacity(grid.dim());
    for k in 0..grid.dim() {
        let mut terms = Vec::with_capacity(grid.face_count(k));
        for f in 0..grid.face_count(k) {
            let (lo, hi) = grid.face_cells(k, f);
            let cells: Vec<usize> = [lo, hi].into_iter().flatten().collect();
            let n = cells.len() as f64;
            let mut ua = cells.iter().map(|&c| uv[c].abs()).sum::<f64>() / n;
            let wa = cells.iter().map(|&c| wv[c]).sum::<f64>() / n;
            if e < 0.0 && ua == 0.0 {
                ua = 1e-300;
                degenerate = true;
            }
            let g = face_gradient(&grid, uv, k, f);
            let gn = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
            let weight = if cells.len() == 2 { vol } else { 0.5 * vol };
            let t = ua.powf(e) * gn.powf(p) * wa * weight;
            if !t.is_finite() {
                return Err(Error::NonFiniteIntegrand { cell: cells[0] });
            }
            terms.push(t);
        }
        axis_sums.push(pairwise_sum(&terms));
    }
    Ok(GradEnergy { value: axis_sums.iter().sum::<f64>() / grid.dim() as f64, degenerate })
}
