use crate::constitutive::{preset_law, ForchheimerLaw, LawPreset};
use crate::fieldspec::FieldSpec;
use crate::error::{Error, Result};
use crate::grid::{BoundaryField, Grid, SpatialField};
use std::fmt;
use std::sync::Arc;

/// Manufactured source `s(x, t)`, used only for verification runs.
pub type SourceFn = Arc<dyn Fn([f64; 3], f64) -> f64 + Send + Sync>;

/// Gravity-type term `Z(u) = -c_z u^{2 lambda} e`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZSpec {
    pub c_z: f64,
    pub direction: [f64; 3],
}

impl ZSpec {
    pub fn none() -> Self {
        ZSpec { c_z: 0.0, direction: [0.0, 0.0, 1.0] }
    }

    /// Builds the term, normalizing `direction`.
    pub fn new(c_z: f64, direction: [f64; 3]) -> Result<Self> {
        if !(c_z.is_finite() && c_z >= 0.0) {
            return Err(Error::InvalidInput(format!("C_Z must be >= 0, got {c_z}")));
        }
        let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidInput(format!("gravity direction {direction:?} has no length")));
        }
        Ok(ZSpec { c_z, direction: direction.map(|v| v / norm) })
    }

    pub fn eval(&self, u: f64, lambda: f64) -> [f64; 3] {
        if self.c_z == 0.0 {
            return [0.0; 3];
        }
        let m = -self.c_z * u.max(0.0).powf(2.0 * lambda);
        self.direction.map(|e| m * e)
    }
}

/// A complete initial boundary value problem.
#[derive(Clone)]
pub struct Scenario {
    pub grid: Grid,
    pub law: ForchheimerLaw,
    pub phi: SpatialField,
    pub lambda: f64,
    pub z: ZSpec,
    pub psi: BoundaryField,
    pub u0: SpatialField,
    pub t_final: f64,
    pub source: Option<SourceFn>,
}

impl fmt::Debug for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Scenario")
            .field("grid", &self.grid)
            .field("lambda", &self.lambda)
            .field("z", &self.z)
            .field("t_final", &self.t_final)
            .field("source", &self.source.is_some())
            .finish_non_exhaustive()
    }
}

impl Scenario {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        law: ForchheimerLaw,
        phi: SpatialField,
        lambda: f64,
        z: ZSpec,
        psi: BoundaryField,
        u0: SpatialField,
        t_final: f64,
        source: Option<SourceFn>,
    ) -> Result<Self> {
        let grid = *law.grid();
        law.coefficients()[0].require_same_grid(&phi)?;
        phi.require_same_grid(&u0)?;
        if *psi.grid() != grid {
            return Err(Error::FieldMismatch("psi lives on a different grid".into()));
        }
        phi.require_positive()?;
        if let Some(cell) = u0.values().iter().position(|&v| v < 0.0) {
            return Err(Error::InvalidInput(format!("initial data negative at cell {cell}: {}", u0.get(cell))));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidInput(format!("lambda must be > 0, got {lambda}")));
        }
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::InvalidInput(format!("final time must be > 0, got {t_final}")));
        }
        for k in 0..grid.dim() {
            if grid.cells_along(k) < 2 {
                return Err(Error::InvalidGrid(format!("solver needs at least 2 cells along axis {k}")));
            }
        }
        Ok(Scenario { grid, law, phi, lambda, z: ZSpec::new(z.c_z, z.direction)?, psi, u0, t_final, source })
    }

    /// Two-term unit law `g = 1 + s` on the unit square with `phi = 1`,
    /// `lambda = 1/2`, no gravity, a constant `psi` and a smooth bump
    /// `u0 = 1 + exp(-|x - c|^2 / 0.02)`.
    pub fn reference(cells: usize, psi: f64, t_final: f64) -> Result<Self> {
        let grid = Grid::unit(2, cells)?;
        let law = preset_law(&LawPreset::TwoTerm { a: FieldSpec::Constant(1.0), b: FieldSpec::Constant(1.0) }, &grid, None)?;
        let u0 = SpatialField::from_fn(grid, "u0", |x| {
            1.0 + (-((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2)) / 0.02).exp()
        })?;
        Scenario::new(
            law,
            SpatialField::constant(grid, 1.0, "phi"),
            0.5,
            ZSpec::none(),
            BoundaryField::constant(grid, psi),
            u0,
            t_final,
            None,
        )
    }

    pub fn with_initial(mut self, u0: SpatialField) -> Result<Self> {
        self.phi.require_same_grid(&u0)?;
        if u0.min() < 0.0 {
            return Err(Error::InvalidInput("initial data must be nonnegative".into()));
        }
        self.u0 = u0;
        Ok(self)
    }

    pub fn has_outflow_only(&self) -> bool {
        self.psi.min() >= 0.0
    }
}

/// Time-stepping controls.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub dt_initial: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Tolerance on `max|w^{k+1} - w^k| / max|w^{k+1}|`.
    pub picard_tol: f64,
    pub picard_max: usize,
    /// Time between snapshots; 0 stores every step.
    pub snapshot_interval: f64,
    /// Exponents `alpha` for which `int phi u^alpha` is recorded.
    pub alphas: Vec<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt_initial: 1e-5,
            dt_min: 1e-12,
            dt_max: 1e-2,
            picard_tol: 1e-10,
            picard_max: 50,
            snapshot_interval: 0.0,
            alphas: vec![2.0],
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_initial && self.dt_initial <= self.dt_max) {
            return Err(Error::InvalidInput(format!(
                "need 0 < dt_min <= dt_initial <= dt_max, got {} / {} / {}",
                self.dt_min, self.dt_initial, self.dt_max
            )));
        }
        if !(self.picard_tol > 0.0) || self.picard_max == 0 {
            return Err(Error::InvalidInput("picard_tol must be > 0 and picard_max >= 1".into()));
        }
        if !(self.snapshot_interval >= 0.0) {
            return Err(Error::InvalidInput("snapshot_interval must be >= 0".into()));
        }
        if self.alphas.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::InvalidInput(format!("recorded exponents must be > 0: {:?}", self.alphas)));
        }
        Ok(())
    }
}
