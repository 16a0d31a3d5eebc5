//! Brute-force power search. This is the independent reference the learned
//! powers are judged against, so it stays a plain exhaustive sweep.

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::idw::loo_error;

/// Powers 0.1, 0.2, …, 20.0.
pub fn default_power_grid() -> Vec<f64> {
    (1..=200).map(|k| k as f64 / 10.0).collect()
}

/// Exhaustive leave-one-out sweep over `grid` for sample `i`. Returns the
/// minimizing `(power, error)`; exact error ties resolve to the smaller
/// power.
pub fn grid_search_power(dataset: &Dataset, i: usize, grid: &[f64]) -> Result<(f64, f64)> {
    if grid.is_empty() {
        return Err(Error::invalid_argument(
            "power grid must not be empty".to_string(),
        ));
    }
    let mut best_p = f64::INFINITY;
    let mut best_err = f64::INFINITY;
    for &p in grid {
        let err = loo_error(dataset, i, p)?;
        if err < best_err || (err == best_err && p < best_p) {
            best_err = err;
            best_p = p;
        }
    }
    Ok((best_p, best_err))
}

/// `grid_search_power` for every sample index, evaluated in parallel.
pub fn grid_search_all(dataset: &Dataset, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    (0..dataset.len())
        .into_par_iter()
        .map(|i| grid_search_power(dataset, i, grid))
        .collect()
}
