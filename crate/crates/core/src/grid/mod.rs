//! Uniform box grids, discrete fields, midpoint quadrature and face gradients.
//!
//! Cells are indexed with axis 0 fastest. Axes at or beyond `dim` carry a
//! single cell of unit width so that 1-D and 2-D grids share the 3-D code
//! paths.

mod csv_io;
mod field;
mod gradient;
mod quadrature;

pub use csv_io::{read_field_csv, write_field_csv};
pub use field::{BoundaryField, FaceField, FaceGradients, SpatialField, TimeSeries};
pub use gradient::{discrete_gradient, divergence, grad_energy, GradEnergy};
pub(crate) use gradient::face_gradient;
pub use quadrature::{
    integrate_boundary, integrate_volume, log_weight_integral, pairwise_sum, weighted_lp_norm,
    FlaggedIntegral,
};

use crate::error::{Error, Result};
use serde::Serialize;

/// Largest default number of cells accepted by [`Grid::new`].
pub const DEFAULT_CELL_BUDGET: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    dim: usize,
    cells: [usize; 3],
    lo: [f64; 3],
    hi: [f64; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    Lo,
    Hi,
}

impl Side {
    /// Sign of the outward normal along the face axis.
    pub fn normal_sign(self) -> f64 {
        match self {
            Side::Lo => -1.0,
            Side::Hi => 1.0,
        }
    }
}

/// A face on the domain boundary, with the single cell it touches.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryFace {
    pub axis: usize,
    pub side: Side,
    pub cell: usize,
    pub center: [f64; 3],
    pub area: f64,
}

impl Grid {
    pub fn new(cells: &[usize], extents: &[(f64, f64)]) -> Result<Self> {
        Self::with_budget(cells, extents, DEFAULT_CELL_BUDGET)
    }

    pub fn with_budget(cells: &[usize], extents: &[(f64, f64)], budget: usize) -> Result<Self> {
        let dim = cells.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if extents.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "{} extents given for a {dim}-D grid",
                extents.len()
            )));
        }
        let mut g = Grid { dim, cells: [1; 3], lo: [0.0; 3], hi: [1.0; 3] };
        let mut total: usize = 1;
        for k in 0..dim {
            let (lo, hi) = extents[k];
            if cells[k] == 0 {
                return Err(Error::InvalidGrid(format!("axis {k} has zero cells")));
            }
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::InvalidGrid(format!("axis {k} has empty extent [{lo}, {hi}]")));
            }
            total = total.checked_mul(cells[k]).unwrap_or(usize::MAX);
            g.cells[k] = cells[k];
            g.lo[k] = lo;
            g.hi[k] = hi;
        }
        if total > budget {
            return Err(Error::InvalidGrid(format!("{total} cells exceed the budget of {budget}")));
        }
        Ok(g)
    }

    /// The unit cube `[0,1]^dim` with `n` cells per axis.
    pub fn unit(dim: usize, n: usize) -> Result<Self> {
        Self::new(&vec![n; dim], &vec![(0.0, 1.0); dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> [usize; 3] {
        self.cells
    }

    pub fn cells_along(&self, axis: usize) -> usize {
        self.cells[axis]
    }

    pub fn extent(&self, axis: usize) -> (f64, f64) {
        (self.lo[axis], self.hi[axis])
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.cells[axis] as f64
    }

    pub fn cell_count(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|k| self.spacing(k)).product()
    }

    pub fn domain_volume(&self) -> f64 {
        (0..self.dim).map(|k| self.hi[k] - self.lo[k]).product()
    }

    /// Area of a face normal to `axis` (1 for the point faces of a 1-D grid).
    pub fn face_area(&self, axis: usize) -> f64 {
        (0..self.dim).filter(|&j| j != axis).map(|j| self.spacing(j)).product()
    }

    pub fn boundary_area(&self) -> f64 {
        (0..self.dim)
            .map(|k| {
                2.0 * (0..self.dim)
                    .filter(|&j| j != k)
                    .map(|j| self.hi[j] - self.lo[j])
                    .product::<f64>()
            })
            .sum()
    }

    pub fn cell_index(&self, m: [usize; 3]) -> usize {
        m[0] + self.cells[0] * (m[1] + self.cells[1] * m[2])
    }

    pub fn cell_multi(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.cells[0];
        let rest = idx / self.cells[0];
        [i, rest % self.cells[1], rest / self.cells[1]]
    }

    pub fn cell_center(&self, idx: usize) -> [f64; 3] {
        let m = self.cell_multi(idx);
        let mut x = [0.0; 3];
        for k in 0..3 {
            x[k] = self.lo[k] + (m[k] as f64 + 0.5) * self.spacing(k);
        }
        x
    }

    /// Neighbour of `idx` one step along `axis` in direction `dir` (+1 or -1).
    pub fn neighbor(&self, idx: usize, axis: usize, dir: i32) -> Option<usize> {
        let mut m = self.cell_multi(idx);
        if dir > 0 {
            if m[axis] + 1 >= self.cells[axis] {
                return None;
            }
            m[axis] += 1;
        } else {
            if m[axis] == 0 {
                return None;
            }
            m[axis] -= 1;
        }
        Some(self.cell_index(m))
    }

    /// Shape of the face lattice normal to `axis`.
    fn face_shape(&self, axis: usize) -> [usize; 3] {
        let mut s = self.cells;
        s[axis] += 1;
        s
    }

    /// Number of faces (interior and boundary) normal to `axis`.
    pub fn face_count(&self, axis: usize) -> usize {
        if axis >= self.dim {
            return 0;
        }
        self.face_shape(axis).iter().product()
    }

    pub fn face_index(&self, axis: usize, m: [usize; 3]) -> usize {
        let s = self.face_shape(axis);
        m[0] + s[0] * (m[1] + s[1] * m[2])
    }

    pub fn face_multi(&self, axis: usize, idx: usize) -> [usize; 3] {
        let s = self.face_shape(axis);
        let i = idx % s[0];
        let rest = idx / s[0];
        [i, rest % s[1], rest / s[1]]
    }

    /// Cells below and above a face normal to `axis`.
    pub fn face_cells(&self, axis: usize, face: usize) -> (Option<usize>, Option<usize>) {
        let m = self.face_multi(axis, face);
        let lower = (m[axis] > 0).then(|| {
            let mut c = m;
            c[axis] -= 1;
            self.cell_index(c)
        });
        let upper = (m[axis] < self.cells[axis]).then(|| self.cell_index(m));
        (lower, upper)
    }

    pub fn face_center(&self, axis: usize, face: usize) -> [f64; 3] {
        let m = self.face_multi(axis, face);
        let mut x = [0.0; 3];
        for k in 0..3 {
            let offset = if k == axis { m[k] as f64 } else { m[k] as f64 + 0.5 };
            x[k] = self.lo[k] + offset * self.spacing(k);
        }
        x
    }

    /// Index of the face on the `side` of cell `idx` normal to `axis`.
    pub fn cell_face(&self, idx: usize, axis: usize, side: Side) -> usize {
        let mut m = self.cell_multi(idx);
        if side == Side::Hi {
            m[axis] += 1;
        }
        self.face_index(axis, m)
    }

    /// Boundary faces ordered by axis, then side (lo before hi), then cell.
    pub fn boundary_faces(&self) -> Vec<BoundaryFace> {
        let mut out = Vec::new();
        for axis in 0..self.dim {
            let area = self.face_area(axis);
            for side in [Side::Lo, Side::Hi] {
                for cell in 0..self.cell_count() {
                    let m = self.cell_multi(cell);
                    let on_side = match side {
                        Side::Lo => m[axis] == 0,
                        Side::Hi => m[axis] + 1 == self.cells[axis],
                    };
                    if !on_side {
                        continue;
                    }
                    let mut center = self.cell_center(cell);
                    center[axis] = match side {
                        Side::Lo => self.lo[axis],
                        Side::Hi => self.hi[axis],
                    };
                    out.push(BoundaryFace { axis, side, cell, center, area });
                }
            }
        }
        out
    }

    pub fn boundary_face_count(&self) -> usize {
        (0..self.dim)
            .map(|k| 2 * (0..self.dim).filter(|&j| j != k).map(|j| self.cells[j]).product::<usize>())
            .sum()
    }
}
