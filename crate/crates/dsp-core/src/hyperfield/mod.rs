//! Per-point power search and the differential prediction pipeline.
//!
//! An agent walks each sample point's IDW power up and down in fixed
//! increments, rewarded by leave-one-out error reduction. The best power
//! seen per point becomes a support of a spatial power field, itself
//! IDW-interpolated, which assigns every future query its own power.

mod env;
mod field;
mod grid;
mod learn;

pub use env::{EnvConfig, EnvState, PowerEnv, StepOutcome};
pub use field::{build_power_field, pipeline_predict, query_power, PowerField};
pub use grid::{default_power_grid, grid_search_all, grid_search_power};
pub use learn::{learn_powers, LearnOutcome, PowerAssignment, PowerEntry};
