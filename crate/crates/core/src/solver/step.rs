use super::scenario::{Scenario, SolverConfig};
use crate::constitutive::PointLaw;
use crate::error::{Error, Result};
use crate::grid::{face_gradient, pairwise_sum, Grid, Side, SpatialField};
use std::fmt;

/// Why a single step attempt was rejected.
#[derive(Clone, Debug, PartialEq)]
pub enum StepFailure {
    NotConverged { iterations: usize, residual: f64 },
    Diverged { iteration: usize, residual: f64 },
    RootFailure { axis: usize, face: usize, residual: f64 },
    /// Inflow through the boundary is too strong for the implicit boundary update.
    InflowTooStrong { cell: usize },
}

impl fmt::Display for StepFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepFailure::NotConverged { iterations, residual } => {
                write!(f, "Picard did not converge in {iterations} iterations (residual {residual:e})")
            }
            StepFailure::Diverged { iteration, residual } => {
                write!(f, "Picard diverged at iteration {iteration} (residual {residual:e})")
            }
            StepFailure::RootFailure { axis, face, residual } => {
                write!(f, "root solve failed at face {face} on axis {axis} (residual {residual:e})")
            }
            StepFailure::InflowTooStrong { cell } => write!(f, "boundary inflow too strong at cell {cell}"),
        }
    }
}

/// Result of one accepted step.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub w: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub clamped_cells: usize,
    /// `int phi |w|` over the cells that were clamped from below to 0.
    pub clamped_mass: f64,
    /// `int_Gamma psi w_face` exactly as used in the final iterate.
    pub outflow: f64,
}

/// Precomputed face data for repeated flux assembly.
pub struct Stepper<'s> {
    scenario: &'s Scenario,
    grid: Grid,
    terms: usize,
    /// Arithmetic face averages of the law coefficients, packed per face, per axis.
    face_coeffs: Vec<Vec<f64>>,
    inv_h: [f64; 3],
    /// Boundary faces as (cell, axis, inward neighbour, face area).
    boundary: Vec<(usize, usize, usize, f64)>,
    u: Vec<f64>,
    div: Vec<f64>,
}

impl<'s> Stepper<'s> {
    pub fn new(scenario: &'s Scenario) -> Self {
        let grid = scenario.grid;
        let law = &scenario.law;
        let terms = law.exponents().len();
        let mut face_coeffs = Vec::with_capacity(grid.dim());
        for axis in 0..grid.dim() {
            let mut packed = vec![0.0; grid.face_count(axis) * terms];
            for f in 0..grid.face_count(axis) {
                if let (Some(l), Some(r)) = grid.face_cells(axis, f) {
                    let (cl, cr) = (law.at(l).coefficients, law.at(r).coefficients);
                    for i in 0..terms {
                        packed[f * terms + i] = 0.5 * (cl[i] + cr[i]);
                    }
                }
            }
            face_coeffs.push(packed);
        }
        let mut inv_h = [0.0; 3];
        for (k, v) in inv_h.iter_mut().enumerate().take(grid.dim()) {
            *v = 1.0 / grid.spacing(k);
        }
        let boundary = grid
            .boundary_faces()
            .iter()
            .map(|b| {
                let inward = match b.side {
                    Side::Lo => grid.neighbor(b.cell, b.axis, 1),
                    Side::Hi => grid.neighbor(b.cell, b.axis, -1),
                };
                (b.cell, b.axis, inward.expect("solver grids have two cells per axis"), b.area)
            })
            .collect();
        let n = grid.cell_count();
        Stepper { scenario, grid, terms, face_coeffs, inv_h, boundary, u: vec![0.0; n], div: vec![0.0; n] }
    }

    /// Interior flux divergence of `X(x_face, grad u + Z(u_face))` for the current `u`.
    fn interior_divergence(&mut self) -> std::result::Result<(), StepFailure> {
        let sc = self.scenario;
        let exps = sc.law.exponents();
        self.div.iter_mut().for_each(|d| *d = 0.0);
        for axis in 0..self.grid.dim() {
            let coeffs = &self.face_coeffs[axis];
            for f in 0..self.grid.face_count(axis) {
                let (Some(l), Some(r)) = self.grid.face_cells(axis, f) else { continue };
                let mut y = face_gradient(&self.grid, &self.u, axis, f);
                let z = sc.z.eval(0.5 * (self.u[l] + self.u[r]), sc.lambda);
                for k in 0..3 {
                    y[k] += z[k];
                }
                let law = PointLaw { exponents: exps, coefficients: &coeffs[f * self.terms..(f + 1) * self.terms] };
                let flux = law.flux(y).map_err(|residual| StepFailure::RootFailure { axis, face: f, residual })?;
                let q = flux[axis] * self.inv_h[axis];
                // The same face value leaves `l` through its upper face and enters `r` through its lower face.
                self.div[l] += q;
                self.div[r] -= q;
            }
        }
        Ok(())
    }

    /// One backward-Euler step from `w_old` at time `t` to `t + dt`.
    pub fn step(
        &mut self,
        w_old: &[f64],
        t: f64,
        dt: f64,
        config: &SolverConfig,
    ) -> std::result::Result<StepOutcome, StepFailure> {
        let sc = self.scenario;
        let n = self.grid.cell_count();
        let t_new = t + dt;
        let psi = sc.psi.at_time(t_new);
        let phi = sc.phi.values();
        let mut implicit = vec![0.0; n];
        let mut explicit = vec![0.0; n];
        let mut extrapolate = vec![true; self.boundary.len()];
        let source: Vec<f64> = match &sc.source {
            Some(s) => (0..n).map(|c| s(self.grid.cell_center(c), t_new)).collect(),
            None => vec![0.0; n],
        };
        let inv_lambda = 1.0 / sc.lambda;
        let mut w = w_old.to_vec();
        let mut next = vec![0.0; n];
        let mut residual = f64::INFINITY;
        let mut growth = 0usize;
        for it in 1..=config.picard_max {
            for c in 0..n {
                self.u[c] = w[c].max(0.0).powf(inv_lambda);
            }
            self.interior_divergence()?;
            implicit.iter_mut().for_each(|v| *v = 0.0);
            explicit.iter_mut().for_each(|v| *v = 0.0);
            for (b, &(cell, axis, inward, _)) in self.boundary.iter().enumerate() {
                let q = psi[b] * self.inv_h[axis];
                extrapolate[b] = 1.5 * w[cell] - 0.5 * w[inward] >= 0.0;
                if extrapolate[b] {
                    implicit[cell] += 1.5 * q;
                    explicit[cell] -= 0.5 * q * w[inward];
                } else {
                    implicit[cell] += q;
                }
            }
            let mut diff: f64 = 0.0;
            let mut size: f64 = 0.0;
            for c in 0..n {
                let denom = 1.0 + dt * implicit[c] / phi[c];
                if denom <= 0.5 {
                    return Err(StepFailure::InflowTooStrong { cell: c });
                }
                next[c] = (w_old[c] + dt / phi[c] * (self.div[c] + source[c] - explicit[c])) / denom;
                diff = diff.max((next[c] - w[c]).abs());
                size = size.max(next[c].abs());
            }
            let prev = residual;
            residual = if size > 0.0 { diff / size } else { diff };
            if !residual.is_finite() {
                return Err(StepFailure::Diverged { iteration: it, residual });
            }
            if residual < config.picard_tol {
                // `w` still holds the iterate that supplied the explicit neighbour values.
                let faces: Vec<f64> = self
                    .boundary
                    .iter()
                    .enumerate()
                    .map(|(b, &(cell, _, inward, area))| {
                        let wf = if extrapolate[b] { 1.5 * next[cell] - 0.5 * w[inward] } else { next[cell] };
                        psi[b] * wf * area
                    })
                    .collect();
                let outflow = pairwise_sum(&faces);
                return Ok(clamp(next, phi, self.grid.cell_volume(), it, residual, outflow));
            }
            std::mem::swap(&mut w, &mut next);
            growth = if residual > prev { growth + 1 } else { 0 };
            if growth >= 3 || residual > 1e3 {
                return Err(StepFailure::Diverged { iteration: it, residual });
            }
        }
        Err(StepFailure::NotConverged { iterations: config.picard_max, residual })
    }
}

fn clamp(mut w: Vec<f64>, phi: &[f64], vol: f64, iterations: usize, residual: f64, outflow: f64) -> StepOutcome {
    let mut clamped_cells = 0;
    let mut lost = Vec::new();
    for (c, v) in w.iter_mut().enumerate() {
        if *v < 0.0 {
            clamped_cells += 1;
            lost.push(-*v * phi[c] * vol);
            *v = 0.0;
        }
    }
    StepOutcome { w, iterations, residual, clamped_cells, clamped_mass: pairwise_sum(&lost), outflow }
}

/// Boundary face values of `w`: linear extrapolation from the two nearest
/// cells, or the adjacent cell value where extrapolation would be negative.
pub fn boundary_face_values(grid: &Grid, w: &[f64]) -> Vec<f64> {
    grid.boundary_faces()
        .iter()
        .map(|b| {
            let dir = if b.side == Side::Lo { 1 } else { -1 };
            let inward = grid.neighbor(b.cell, b.axis, dir).map_or(w[b.cell], |i| w[i]);
            let ex = 1.5 * w[b.cell] - 0.5 * inward;
            if ex >= 0.0 { ex } else { w[b.cell] }
        })
        .collect()
}

/// Checks that every interior face is the upper face of its lower cell and
/// the lower face of its upper cell, so its flux enters both with opposite signs.
pub fn flux_antisymmetry(grid: &Grid) -> bool {
    (0..grid.dim()).all(|axis| {
        (0..grid.face_count(axis)).all(|f| match grid.face_cells(axis, f) {
            (Some(l), Some(r)) => grid.cell_face(l, axis, Side::Hi) == f && grid.cell_face(r, axis, Side::Lo) == f,
            _ => true,
        })
    })
}

/// One step on a field of `w = u^lambda`; `dt` must lie in `[dt_min, dt_max]`.
pub fn step(state: &SpatialField, t: f64, dt: f64, scenario: &Scenario, config: &SolverConfig) -> Result<StepOutcome> {
    config.validate()?;
    state.require_same_grid(&scenario.phi)?;
    if !(dt >= config.dt_min && dt <= config.dt_max) {
        return Err(Error::InvalidInput(format!("dt = {dt} outside [{}, {}]", config.dt_min, config.dt_max)));
    }
    if state.min() < 0.0 {
        return Err(Error::InvalidInput("state must be nonnegative".into()));
    }
    Stepper::new(scenario)
        .step(state.values(), t, dt, config)
        .map_err(|e| Error::SolverFailure { t, reason: e.to_string() })
}
