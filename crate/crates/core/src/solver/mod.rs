//! Finite-volume time integration of `phi (u^lambda)_t = div X(x, grad u + Z(u))`
//! with the flux condition `X . nu + psi u^lambda = 0` on the boundary.
//!
//! The unknown is `w = u^lambda`. Each backward-Euler step runs a
//! frozen-coefficient Picard iteration: face fluxes come from the previous
//! iterate and the per-cell balance is then explicit, with the boundary term
//! taken implicitly in the cell's own `w`. Boundary values of `w` are
//! extrapolated linearly from the two nearest cells (or copied from the
//! adjacent cell where that would go negative). Interior fluxes telescope, so the
//! discrete mass identity holds to rounding whatever the Picard residual.
//!
//! The scheme computes *a* numerical solution; no uniqueness theory backs it
//! and downstream bound checks are conditional on it.

mod diagnostics;
mod scenario;
mod step;
mod trace;

pub use diagnostics::{
    mass_balance_report, monotonicity_check, ClampEvent, MassBalanceReport, MonotonicityReport, MASS_IDENTITY_TOL,
    MONOTONICITY_SLACK, SOURCE_IDENTITY_TOL,
};
pub use scenario::{Scenario, SolverConfig, SourceFn, ZSpec};
pub use step::{boundary_face_values, flux_antisymmetry, step, StepFailure, StepOutcome, Stepper};
pub use trace::{solve, Snapshot, SolutionTrace, StepRecord};
