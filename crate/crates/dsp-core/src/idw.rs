//! Inverse-distance-weighted interpolation.
//!
//! The prediction at a query point is the weight-normalized average of
//! sample values with weights 1/d^p. Weights are computed in the
//! overflow-safe form (d_min/d)^p, which is algebraically identical after
//! normalization but keeps p = 50 runs finite. A query closer than
//! `zero_distance_epsilon` to a sample snaps to that sample's value, which
//! preserves exactness at sample locations.

use serde::{Deserialize, Serialize};

use crate::dataset::{euclidean_distance, Dataset, Point, Sample};
use crate::error::{Error, Result};

/// Interpolator knobs. `neighbor_limit` restricts the sum to the k nearest
/// samples; the default uses every sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdwConfig {
    pub power: f64,
    pub zero_distance_epsilon: f64,
    pub neighbor_limit: Option<usize>,
}

impl Default for IdwConfig {
    fn default() -> Self {
        IdwConfig {
            power: 2.0,
            zero_distance_epsilon: 1e-12,
            neighbor_limit: None,
        }
    }
}

impl IdwConfig {
    pub fn with_power(power: f64) -> Self {
        IdwConfig {
            power,
            ..IdwConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.power.is_finite() || self.power <= 0.0 {
            return Err(Error::invalid_argument(format!(
                "IDW power must be finite and > 0, got {}",
                self.power
            )));
        }
        if self.zero_distance_epsilon.is_nan() || self.zero_distance_epsilon < 0.0 {
            return Err(Error::invalid_argument(
                "zero_distance_epsilon must be >= 0".to_string(),
            ));
        }
        if self.neighbor_limit == Some(0) {
            return Err(Error::invalid_argument(
                "neighbor_limit must be >= 1 when set".to_string(),
            ));
        }
        Ok(())
    }
}

/// Core weighted average over `samples`, optionally skipping one index
/// (leave-one-out) and optionally restricted to the k nearest. Every public
/// prediction routes through here so that alternate entry points agree
/// bit-for-bit.
fn predict_excluding(
    samples: &[Sample],
    skip: Option<usize>,
    query: Point,
    power: f64,
    eps: f64,
    neighbor_limit: Option<usize>,
) -> Result<f64> {
    if !query.is_finite() {
        return Err(Error::NonFinite(format!(
            "query point ({}, {})",
            query.x, query.y
        )));
    }

    // (distance, index) over the considered samples.
    let mut dists: Vec<(f64, usize)> = Vec::with_capacity(samples.len());
    for (i, s) in samples.iter().enumerate() {
        if skip == Some(i) {
            continue;
        }
        let d = euclidean_distance(query, s.position());
        if d <= eps {
            return Ok(s.value);
        }
        dists.push((d, i));
    }
    if dists.is_empty() {
        return Err(Error::EmptyDataset);
    }

    if let Some(k) = neighbor_limit {
        if k < dists.len() {
            dists.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
            dists.truncate(k);
        }
    }

    // A constant field interpolates to that constant exactly.
    let first_val = samples[dists[0].1].value;
    if dists.iter().all(|&(_, i)| samples[i].value == first_val) {
        return Ok(first_val);
    }

    let d_min = dists
        .iter()
        .map(|&(d, _)| d)
        .fold(f64::INFINITY, f64::min);
    let mut num = 0.0;
    let mut den = 0.0;
    for &(d, i) in &dists {
        let w = (d_min / d).powf(power);
        num += w * samples[i].value;
        den += w;
    }
    Ok(num / den)
}

/// Normalized weights of every training sample for a query, in sample order.
/// The query must not coincide with a sample (see `idw_predict`'s snap rule).
pub fn idw_weights(train: &Dataset, query: Point, power: f64) -> Result<Vec<f64>> {
    IdwConfig::with_power(power).validate()?;
    if !query.is_finite() {
        return Err(Error::NonFinite("query point".to_string()));
    }
    let mut raw = Vec::with_capacity(train.len());
    let mut d_min = f64::INFINITY;
    for s in train.samples() {
        let d = euclidean_distance(query, s.position());
        if d == 0.0 {
            return Err(Error::invalid_argument(
                "idw_weights is undefined at a sample location".to_string(),
            ));
        }
        d_min = d_min.min(d);
        raw.push(d);
    }
    let mut sum = 0.0;
    for d in raw.iter_mut() {
        *d = (d_min / *d).powf(power);
        sum += *d;
    }
    for w in raw.iter_mut() {
        *w /= sum;
    }
    Ok(raw)
}

/// Interpolated value at a query point.
pub fn idw_predict(train: &Dataset, query: Point, cfg: &IdwConfig) -> Result<f64> {
    cfg.validate()?;
    predict_excluding(
        train.samples(),
        None,
        query,
        cfg.power,
        cfg.zero_distance_epsilon,
        cfg.neighbor_limit,
    )
}

/// Absolute leave-one-out error at sample `i`: the sample is removed, the
/// remaining samples predict at its location, and |actual − predicted| is
/// returned. This is the learning signal for power search.
pub fn loo_error(train: &Dataset, i: usize, power: f64) -> Result<f64> {
    if train.len() < 2 {
        return Err(Error::invalid_argument(
            "leave-one-out needs at least 2 samples".to_string(),
        ));
    }
    let target = *train.get(i)?;
    IdwConfig::with_power(power).validate()?;
    let pred = predict_excluding(
        train.samples(),
        Some(i),
        target.position(),
        power,
        1e-12,
        None,
    )?;
    Ok((target.value - pred).abs())
}

/// `idw_predict` with the exponent supplied per query. Separated so
/// pipelines can log the power each prediction used.
pub fn differential_idw_predict(
    train: &Dataset,
    query: Point,
    power_of_query: f64,
    cfg: &IdwConfig,
) -> Result<f64> {
    let cfg = IdwConfig {
        power: power_of_query,
        ..cfg.clone()
    };
    idw_predict(train, query, &cfg)
}
