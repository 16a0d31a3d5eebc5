//! Differential spatial prediction toolkit.
//!
//! Classic inverse-distance-weighted (IDW) interpolation uses one global
//! distance-decay power. This crate instead learns a power per sample point
//! with a deep Q-learning agent whose reward is the leave-one-out error
//! reduction, interpolates those powers into a spatial power field, and
//! predicts each query with the power the field assigns to it.
//!
//! Module map:
//! - [`dataset`]: CSV ingestion, standardization, splitting
//! - [`synth`]: seeded synthetic dataset generator
//! - [`idw`]: the interpolator and its leave-one-out error
//! - [`nn`]: small dense networks (single or dueling head)
//! - [`rl`]: DQN / DDQN / dueling DQN / reward-reshaped dueling DQN
//! - [`hyperfield`]: power-search environment, learning loop, power field
//! - [`eval`]: error metrics, convergence measurement, model comparison

pub mod dataset;
pub mod error;
pub mod eval;
pub mod hyperfield;
pub mod idw;
pub mod nn;
pub mod rl;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
