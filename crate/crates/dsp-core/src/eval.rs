//! Error metrics, convergence-time measurement and model comparison.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{split_train_test, Dataset};
use crate::error::{Error, Result};
use crate::hyperfield::{build_power_field, learn_powers, pipeline_predict, EnvConfig};
use crate::idw::{idw_predict, IdwConfig};
use crate::rl::{AgentConfig, Variant};

/// Actuals with magnitude at or below this are excluded from MAPE.
pub const MAPE_ZERO_FLOOR: f64 = 1e-12;

/// The four headline error metrics plus bookkeeping for the MAPE skip rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mse: f64,
    pub mae: f64,
    pub rmse: f64,
    pub mape_percent: f64,
    /// Pairs that entered MSE/MAE/RMSE.
    pub n_used: usize,
    /// Pairs excluded from MAPE because the actual was (near) zero.
    pub n_skipped_mape: usize,
}

/// MSE, MAE, RMSE = √MSE and MAPE in percent. Points whose actual value is
/// within `MAPE_ZERO_FLOOR` of zero are skipped by MAPE only and counted.
pub fn compute_metrics(predicted: &[f64], actual: &[f64]) -> Result<MetricReport> {
    if predicted.len() != actual.len() {
        return Err(Error::DimensionMismatch {
            expected: actual.len(),
            got: predicted.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::invalid_argument(
            "metrics need at least one pair".to_string(),
        ));
    }
    let n = predicted.len() as f64;
    let mut sq = 0.0;
    let mut abs = 0.0;
    let mut pct = 0.0;
    let mut n_pct = 0usize;
    for (&p, &a) in predicted.iter().zip(actual) {
        let d = p - a;
        sq += d * d;
        abs += d.abs();
        if a.abs() > MAPE_ZERO_FLOOR {
            pct += (d / a).abs();
            n_pct += 1;
        }
    }
    let mse = sq / n;
    Ok(MetricReport {
        mse,
        mae: abs / n,
        rmse: mse.sqrt(),
        mape_percent: if n_pct > 0 {
            100.0 * pct / n_pct as f64
        } else {
            0.0
        },
        n_used: predicted.len(),
        n_skipped_mape: predicted.len() - n_pct,
    })
}

/// Convergence verdict for a training error curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub converged: bool,
    pub episode_of_convergence: Option<usize>,
    /// Whole-loop wall time, filled in by the training driver.
    pub wall_seconds: f64,
    pub window: usize,
    pub precision: f64,
}

impl std::fmt::Display for ConvergenceRecord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.episode_of_convergence {
            Some(e) => write!(
                f,
                "converged at episode {e} (window {}, precision {}, {:.2}s)",
                self.window, self.precision, self.wall_seconds
            ),
            None => write!(
                f,
                ">> (not converged; window {}, precision {}, {:.2}s)",
                self.window, self.precision, self.wall_seconds
            ),
        }
    }
}

/// Trailing moving average with partial windows at the start, so the
/// smoothed curve has the same length as the input.
pub fn trailing_moving_average(curve: &[f64], window: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(curve.len());
    for t in 0..curve.len() {
        let lo = (t + 1).saturating_sub(window);
        let slice = &curve[lo..=t];
        out.push(slice.iter().sum::<f64>() / slice.len() as f64);
    }
    out
}

/// Smooths the curve with a trailing window, finds the smoothed global
/// minimum m, and reports the first episode from which every smoothed value
/// stays within `precision` of m. No such episode means no convergence.
pub fn measure_convergence(
    error_curve: &[f64],
    window: usize,
    precision: f64,
) -> Result<ConvergenceRecord> {
    if window == 0 {
        return Err(Error::invalid_argument("window must be >= 1".to_string()));
    }
    if error_curve.is_empty() {
        return Err(Error::invalid_argument(
            "error curve must not be empty".to_string(),
        ));
    }
    if precision.is_nan() || precision < 0.0 {
        return Err(Error::invalid_argument(
            "precision must be >= 0".to_string(),
        ));
    }
    let smoothed = trailing_moving_average(error_curve, window);
    let m = smoothed.iter().copied().fold(f64::INFINITY, f64::min);
    let band = m + precision;
    // First index after the last out-of-band smoothed value.
    let episode = smoothed
        .iter()
        .rposition(|&s| s > band)
        .map(|last_bad| last_bad + 1);
    let (converged, episode_of_convergence) = match episode {
        None => (true, Some(0)),
        Some(e) if e < smoothed.len() => (true, Some(e)),
        Some(_) => (false, None),
    };
    Ok(ConvergenceRecord {
        converged,
        episode_of_convergence,
        wall_seconds: 0.0,
        window,
        precision,
    })
}

/// A model entering a comparison run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ModelSpec {
    /// Fixed-power IDW (the prior-parameter baseline).
    ClassicIdw,
    /// Learned power field with the given agent variant.
    Pipeline(Variant),
}

impl ModelSpec {
    pub fn name(&self, idw_power: f64) -> String {
        match self {
            ModelSpec::ClassicIdw => format!("idw-p{idw_power}"),
            ModelSpec::Pipeline(v) => format!("{v}-idw"),
        }
    }
}

/// One model's predictions on the shared test points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRow {
    pub name: String,
    pub metrics: MetricReport,
    pub predicted: Vec<f64>,
    /// Signed prediction − actual per test point.
    pub errors: Vec<f64>,
}

/// Full comparison output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub dataset_name: String,
    pub split_seed: u64,
    pub train_fraction: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub actual: Vec<f64>,
    pub models: Vec<ModelRow>,
}

impl ComparisonReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Metric table in the column order MSE, MAE, RMSE, MAPE.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,mse,mae,rmse,mape_percent\n");
        for m in &self.models {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                m.name, m.metrics.mse, m.metrics.mae, m.metrics.rmse, m.metrics.mape_percent
            ));
        }
        out
    }
}

/// Shared settings for a comparison run.
#[derive(Debug, Clone)]
pub struct CompareConfig {
    pub split_seed: u64,
    pub train_fraction: f64,
    pub idw: IdwConfig,
    pub agent: AgentConfig,
    pub env: EnvConfig,
    pub field_power: f64,
}

impl CompareConfig {
    pub fn new(split_seed: u64, agent: AgentConfig) -> Self {
        CompareConfig {
            split_seed,
            train_fraction: 0.8,
            idw: IdwConfig::default(),
            agent,
            env: EnvConfig::default(),
            field_power: 2.0,
        }
    }
}

/// Splits the dataset, evaluates every requested model on the shared test
/// set and reports per-point errors plus metrics per model. Pipeline models
/// re-learn powers on the training part with the configured agent settings
/// (variant overridden per model).
pub fn compare_models(
    dataset: &Dataset,
    models: &[ModelSpec],
    cfg: &CompareConfig,
) -> Result<ComparisonReport> {
    if models.is_empty() {
        return Err(Error::invalid_argument(
            "at least one model must be requested".to_string(),
        ));
    }
    cfg.idw.validate()?;
    let (train, test) = split_train_test(dataset, cfg.train_fraction, cfg.split_seed)?;
    let actual: Vec<f64> = test.values().collect();

    let mut rows = Vec::with_capacity(models.len());
    for spec in models {
        let predicted: Vec<f64> = match spec {
            ModelSpec::ClassicIdw => test
                .samples()
                .par_iter()
                .map(|s| idw_predict(&train, s.position(), &cfg.idw))
                .collect::<Result<_>>()?,
            ModelSpec::Pipeline(variant) => {
                let agent_cfg = AgentConfig {
                    variant: *variant,
                    ..cfg.agent.clone()
                };
                let outcome = learn_powers(&train, &agent_cfg, &cfg.env)?;
                let field = build_power_field(&train, &outcome.assignment, cfg.field_power)?;
                test.samples()
                    .par_iter()
                    .map(|s| pipeline_predict(&train, &field, s.position(), &cfg.idw))
                    .collect::<Result<_>>()?
            }
        };
        let errors: Vec<f64> = predicted.iter().zip(&actual).map(|(p, a)| p - a).collect();
        rows.push(ModelRow {
            name: spec.name(cfg.idw.power),
            metrics: compute_metrics(&predicted, &actual)?,
            predicted,
            errors,
        });
    }

    Ok(ComparisonReport {
        dataset_name: dataset.name().to_string(),
        split_seed: cfg.split_seed,
        train_fraction: cfg.train_fraction,
        n_train: train.len(),
        n_test: test.len(),
        actual,
        models: rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Sample;

    #[test]
    fn metrics_identity() {
        let r = compute_metrics(&[1.0, 2.0, 0.0], &[1.0, 2.0, 0.0]).unwrap();
        assert_eq!(r.mse, 0.0);
        assert_eq!(r.mae, 0.0);
        assert_eq!(r.rmse, 0.0);
        assert_eq!(r.mape_percent, 0.0);
        assert_eq!(r.n_used, 3);
        assert_eq!(r.n_skipped_mape, 1);
    }

    #[test]
    fn metrics_hand_example() {
        let r = compute_metrics(&[1.0, 2.0], &[3.0, 2.0]).unwrap();
        assert_eq!(r.mse, 2.0);
        assert_eq!(r.mae, 1.0);
        assert!((r.rmse - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!((r.mape_percent - 100.0 / 3.0).abs() < 1e-9);
        assert_eq!(r.n_skipped_mape, 0);
    }

    #[test]
    fn metrics_skip_zero_actual() {
        let r = compute_metrics(&[1.0, 5.0], &[0.0, 4.0]).unwrap();
        assert_eq!(r.n_skipped_mape, 1);
        assert!((r.mape_percent - 25.0).abs() < 1e-12);
    }

    #[test]
    fn metrics_rejects_mismatch_and_empty() {
        assert!(compute_metrics(&[1.0], &[1.0, 2.0]).is_err());
        assert!(compute_metrics(&[], &[]).is_err());
    }

    #[test]
    fn convergence_monotone_curve() {
        // Strictly decreasing, flattening at the end.
        let curve: Vec<f64> = (0..50).map(|t| 1.0 / (1.0 + t as f64)).collect();
        let r = measure_convergence(&curve, 1, 0.01).unwrap();
        assert!(r.converged);
        let e = r.episode_of_convergence.unwrap();
        let m = 1.0 / 50.0;
        assert!(curve[e] <= m + 0.01);
        assert!(curve[e - 1] > m + 0.01);
    }

    #[test]
    fn convergence_constant_curve_at_zero() {
        let curve = vec![0.7; 30];
        let r = measure_convergence(&curve, 10, 0.01).unwrap();
        assert!(r.converged);
        assert_eq!(r.episode_of_convergence, Some(0));
    }

    #[test]
    fn convergence_revoked_by_rising_tail() {
        // Dips, then climbs above the band at the very end.
        let mut curve = vec![1.0, 0.5, 0.2, 0.1, 0.1, 0.1];
        curve.push(5.0);
        let r = measure_convergence(&curve, 1, 0.01).unwrap();
        assert!(!r.converged);
        assert_eq!(r.episode_of_convergence, None);
    }

    #[test]
    fn convergence_rejects_bad_window() {
        assert!(measure_convergence(&[1.0], 0, 0.01).is_err());
        assert!(measure_convergence(&[], 5, 0.01).is_err());
    }

    #[test]
    fn smoothing_partial_windows() {
        let s = trailing_moving_average(&[4.0, 2.0, 6.0], 2);
        assert_eq!(s, vec![4.0, 3.0, 4.0]);
    }

    #[test]
    fn compare_classic_only_has_one_row() {
        let samples: Vec<Sample> = (0..20)
            .map(|k| {
                let x = (k % 5) as f64;
                let y = (k / 5) as f64;
                Sample::new(x, y, x + y)
            })
            .collect();
        let d = Dataset::new("grid", samples).unwrap();
        let cfg = CompareConfig::new(3, AgentConfig::new(Variant::Dqn, 3, 10));
        let report = compare_models(&d, &[ModelSpec::ClassicIdw], &cfg).unwrap();
        assert_eq!(report.models.len(), 1);
        assert_eq!(report.n_train, 16);
        assert_eq!(report.n_test, 4);
        assert_eq!(report.models[0].predicted.len(), 4);
        let csv = report.to_csv();
        assert!(csv.starts_with("model,mse,mae,rmse,mape_percent\n"));
    }

    #[test]
    fn compare_constant_dataset_zero_error() {
        let samples: Vec<Sample> = (0..15)
            .map(|k| Sample::new((k % 5) as f64, (k / 5) as f64, 4.5))
            .collect();
        let d = Dataset::new("const", samples).unwrap();
        let env = EnvConfig {
            episode_budget: 6,
            episode_length: 5,
            ..EnvConfig::default()
        };
        let cfg = CompareConfig {
            env,
            ..CompareConfig::new(1, AgentConfig::new(Variant::Dqn, 1, 6))
        };
        let report = compare_models(
            &d,
            &[ModelSpec::ClassicIdw, ModelSpec::Pipeline(Variant::Dqn)],
            &cfg,
        )
        .unwrap();
        for row in &report.models {
            assert_eq!(row.metrics.mse, 0.0, "{}", row.name);
            assert_eq!(row.metrics.mae, 0.0);
        }
    }

    #[test]
    fn compare_is_deterministic() {
        let samples: Vec<Sample> = (0..24)
            .map(|k| {
                let x = (k % 6) as f64 * 2.0;
                let y = (k / 6) as f64 * 2.0;
                Sample::new(x, y, (0.3 * x).sin() + 0.1 * y)
            })
            .collect();
        let d = Dataset::new("det", samples).unwrap();
        let mut cfg = CompareConfig::new(5, AgentConfig::new(Variant::RsvDuDqn, 5, 12));
        cfg.env.episode_budget = 12;
        cfg.env.episode_length = 5;
        cfg.agent.batch_size = 8;
        let models = [
            ModelSpec::Pipeline(Variant::RsvDuDqn),
            ModelSpec::Pipeline(Variant::RsvDuDqn),
        ];
        let report = compare_models(&d, &models, &cfg).unwrap();
        assert_eq!(report.models[0].predicted, report.models[1].predicted);
        assert_eq!(report.models[0].metrics, report.models[1].metrics);
    }
}
