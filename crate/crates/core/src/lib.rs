//! Core algorithms for degenerate Forchheimer gas flow in heterogeneous porous media.
//!
//! * [`constitutive`]: the generalized Forchheimer law, its inverse and weights.
//! * [`grid`]: box grids, fields, quadrature and face gradients.
//! * [`harness`]: numerical checks of the weighted embedding inequalities.
//! * [`solver`]: implicit finite-volume solver for the degenerate parabolic problem.
//! * [`bounds`]: explicit a-priori `L^alpha` and `L^infinity` bound evaluation.

pub mod bounds;
pub mod constitutive;
pub mod error;
pub mod fieldspec;
pub mod grid;
pub mod harness;
pub mod logspace;
pub mod solver;

pub use constitutive::{compute_weights, lambda_from_gamma, preset_law, ForchheimerLaw, LawPreset, PointLaw, WeightFields};
pub use error::{Error, Result};
pub use fieldspec::{FieldPreset, FieldSpec};
pub use grid::{BoundaryField, Grid, SpatialField, TimeSeries};
pub use logspace::LogScalar;
