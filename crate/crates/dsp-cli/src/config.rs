//! Run configuration: one JSON file covering every module, with flag
//! overrides on top. Unknown keys are rejected so typos fail loudly.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use dsp_core::eval::CompareConfig;
use dsp_core::hyperfield::EnvConfig;
use dsp_core::idw::IdwConfig;
use dsp_core::rl::AgentConfig;
use dsp_core::rng::derive_seed;
use dsp_core::synth::SyntheticConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceSettings {
    pub window: usize,
    pub precision: f64,
}

impl Default for ConvergenceSettings {
    fn default() -> Self {
        ConvergenceSettings {
            window: 100,
            precision: 0.01,
        }
    }
}

/// The merged configuration record. Every field has a default; a config
/// file may set any subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Global seed; per-module streams derive from it by fixed labels.
    pub seed: u64,
    pub train_fraction: f64,
    /// Exponent used to interpolate learned powers into a field.
    pub field_power: f64,
    pub synthetic: SyntheticConfig,
    pub idw: IdwConfig,
    /// Agent settings. The nested `seed` is always overwritten from the
    /// global seed.
    pub agent: AgentConfig,
    pub env: EnvConfig,
    pub convergence: ConvergenceSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            train_fraction: 0.8,
            field_power: 2.0,
            synthetic: SyntheticConfig::default(),
            idw: IdwConfig::default(),
            agent: AgentConfig::default(),
            env: EnvConfig::default(),
            convergence: ConvergenceSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("invalid config {}", path.display()))?;
        Ok(cfg)
    }

    /// Applies the global seed: stores it and re-derives the per-module
    /// streams that hang off it.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.agent.seed = derive_seed(seed, "agent");
        self.synthetic.seed = seed;
        self
    }

    /// Epsilon anneal spans the first half of the episode budget.
    pub fn with_episode_budget(mut self, episodes: usize) -> Self {
        self.env.episode_budget = episodes;
        self.agent.epsilon = dsp_core::rl::EpsilonSchedule::over_half(episodes);
        self
    }

    pub fn compare_config(&self) -> CompareConfig {
        CompareConfig {
            split_seed: derive_seed(self.seed, "split"),
            train_fraction: self.train_fraction,
            idw: self.idw.clone(),
            agent: self.agent.clone(),
            env: self.env,
            field_power: self.field_power,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_roundtrip_and_reject_unknown_keys() {
        let cfg = RunConfig::default();
        let json = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);

        let bad = r#"{"sed": 4}"#;
        assert!(serde_json::from_str::<RunConfig>(bad).is_err());
        let nested_bad = r#"{"idw": {"powerr": 3.0}}"#;
        assert!(serde_json::from_str::<RunConfig>(nested_bad).is_err());
    }

    #[test]
    fn seed_derivation_touches_modules() {
        let cfg = RunConfig::default().with_seed(99);
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.synthetic.seed, 99);
        assert_eq!(cfg.agent.seed, derive_seed(99, "agent"));
    }

    #[test]
    fn partial_config_fills_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"train_fraction": 0.75}"#).unwrap();
        assert_eq!(cfg.train_fraction, 0.75);
        assert_eq!(cfg.field_power, 2.0);
        assert_eq!(cfg.convergence.window, 100);
        // The episode cap default.
        assert_eq!(cfg.env.episode_budget, 5000);
    }
}
