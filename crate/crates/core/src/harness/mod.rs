//! Numerical checks of the weighted Sobolev, trace and parabolic embedding
//! inequalities on seeded families of test functions.
//!
//! The inequalities themselves are proven; what the harness exercises is the
//! discretization and the embedding constants, which are calibrated on a
//! finite family and inflated by a safety factor.

mod calibrate;
mod checks;
mod family;
mod params;
mod suite;

pub use calibrate::{calibrate_constants, EmbeddingConstants, Provenance, DEFAULT_SAFETY_FACTOR};
pub use checks::{
    check_parabolic_sobolev, check_trace_simple, check_trace_two_weight, check_weighted_sobolev, CheckKind,
    CheckOutcome, PASS_SLACK,
};
pub use family::{SampledFunction, TestFunction, TestFunctionFamily};
pub use params::{d1, d2, SobolevParams, TraceBranch};
pub use suite::{default_parameter_sets, run_suite, SuiteConstants, SuiteRecord, SuiteReport};
