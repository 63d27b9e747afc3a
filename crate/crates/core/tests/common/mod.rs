//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use porebound_core::grid::{BoundaryField, Grid, SpatialField};
use porebound_core::solver::{solve, Scenario, SolverConfig, ZSpec};
use porebound_core::{FieldSpec, LawPreset, PointLaw};
use std::sync::Arc;

/// Exact solution of the manufactured 1-D problem.
pub fn mms_exact(x: f64, t: f64) -> f64 {
    1.0 + t * x * (1.0 - x)
}

/// `s(xi)` and `s'(xi)` for the unit two-term law `g = 1 + s`, written out
/// independently of the library root solver.
fn unit_law_s(xi: f64) -> (f64, f64) {
    let s = 2.0 * xi / (1.0 + (1.0 + 4.0 * xi).sqrt());
    (s, 1.0 / (1.0 + 2.0 * s))
}

/// The manufactured problem on `[0, 1]` with `lambda = 1/2` and `phi = 1`.
///
/// The flux is `X(u_x) = sign(u_x) s(|u_x|)`, so the source is
/// `lambda u^{lambda-1} u_t - s'(|u_x|) u_xx`, and matching the boundary flux
/// with `w = 1` at both ends gives `psi(t) = s(t)`.
pub fn mms_scenario(cells: usize, t_final: f64) -> Scenario {
    let lambda = 0.5;
    let grid = Grid::unit(1, cells).unwrap();
    let law = porebound_core::preset_law(
        &LawPreset::TwoTerm { a: FieldSpec::Constant(1.0), b: FieldSpec::Constant(1.0) },
        &grid,
        None,
    )
    .unwrap();
    let samples = 400;
    let times: Vec<f64> = (0..=samples).map(|k| t_final * k as f64 / samples as f64).collect();
    let psi_samples = times.iter().map(|&t| vec![unit_law_s(t).0; 2]).collect();
    let psi = BoundaryField::sampled(grid, times, psi_samples).unwrap();
    let source = Arc::new(move |x: [f64; 3], t: f64| {
        let x = x[0];
        let u = mms_exact(x, t);
        let ux = t * (1.0 - 2.0 * x);
        let (_, ds) = unit_law_s(ux.abs());
        lambda * u.powf(lambda - 1.0) * x * (1.0 - x) + 2.0 * t * ds
    });
    Scenario::new(
        law,
        SpatialField::constant(grid, 1.0, "phi"),
        lambda,
        ZSpec::none(),
        psi,
        SpatialField::from_fn(grid, "u0", |x| mms_exact(x[0], 0.0)).unwrap(),
        t_final,
        Some(source),
    )
    .unwrap()
}

/// Max-norm error at the final time of the manufactured run.
pub fn mms_error(cells: usize, t_final: f64) -> f64 {
    let sc = mms_scenario(cells, t_final);
    let h = 1.0 / cells as f64;
    let dt = 0.125 * h * h;
    let config = SolverConfig { dt_initial: dt, dt_max: dt, alphas: vec![], ..Default::default() };
    let tr = solve(&sc, &config).unwrap();
    let u = tr.final_u();
    (0..cells)
        .map(|c| (u.get(c) - mms_exact(sc.grid.cell_center(c)[0], t_final)).abs())
        .fold(0.0, f64::max)
}

/// Checks the independent root formula against the library once.
pub fn unit_law_agrees(xi: f64) -> bool {
    let law = PointLaw::new(&[0.0, 1.0], &[1.0, 1.0]).unwrap();
    (law.solve_s(xi).unwrap() - unit_law_s(xi).0).abs() <= 1e-13 * (1.0 + xi)
}
