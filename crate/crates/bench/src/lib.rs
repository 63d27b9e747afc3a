//! Fixtures shared by the benchmarks.

use porebound_core::bounds::{bound_report, BoundOptions, BoundReport};
use porebound_core::harness::EmbeddingConstants;
use porebound_core::solver::{Scenario, SolverConfig};
use porebound_core::{preset_law, FieldSpec, ForchheimerLaw, Grid, LawPreset, SpatialField};

pub fn unit_constants() -> EmbeddingConstants {
    EmbeddingConstants::user_supplied([1.0; 7]).expect("unit constants are positive")
}

/// Three-term law with smooth heterogeneous coefficients on a `cells^2` grid.
pub fn three_term_law(cells: usize) -> ForchheimerLaw {
    let grid = Grid::unit(2, cells).expect("valid grid");
    let spec = |s: &str| s.parse::<FieldSpec>().expect("valid spec");
    let preset = LawPreset::ThreeTerm {
        a: spec("preset:gauss_bump(0.5,0.5,0.2,1.0,1.0)"),
        b: spec("preset:linear_x"),
        c: spec("preset:checker(1.0,2.0)"),
    };
    preset_law(&preset, &grid, None).expect("valid law")
}

/// Reference scenario with a bump initial state, run to half its blow-up time.
pub fn reference_scenario(cells: usize) -> Scenario {
    let make = |t: f64| {
        let sc = Scenario::reference(cells, 0.5, t).expect("reference scenario");
        let u0 = "preset:gauss_bump(0.5,0.5,0.15,1.0,1.0)"
            .parse::<FieldSpec>()
            .and_then(|s| s.to_field(&sc.grid, "u0", None))
            .expect("valid initial field");
        sc.with_initial(u0).expect("matching grid")
    };
    let probe = reference_report(&make(1.0));
    make(0.5 * probe.curve.t_threshold)
}

pub fn reference_report(sc: &Scenario) -> BoundReport {
    bound_report(sc, &unit_constants(), &BoundOptions::small_r()).expect("admissible reference")
}

/// Fixed step size `T / steps` with the bound exponent recorded.
pub fn fixed_steps(sc: &Scenario, steps: usize, alpha: f64) -> SolverConfig {
    let dt = sc.t_final / steps as f64;
    SolverConfig { dt_initial: dt, dt_max: dt, dt_min: dt * 1e-8, alphas: vec![alpha], ..Default::default() }
}

pub fn smooth_field(grid: &Grid) -> SpatialField {
    "preset:gauss_bump(0.4,0.6,0.25,2.0,0.5)"
        .parse::<FieldSpec>()
        .and_then(|s| s.to_field(grid, "f", None))
        .expect("valid field")
}
