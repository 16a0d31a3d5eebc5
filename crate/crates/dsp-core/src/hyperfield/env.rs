//! The power-search environment.
//!
//! State: the current sample point's standardized coordinates plus the
//! current power normalized by `p_max` (all inputs O(1)). Action: one of
//! the configured power increments, clamped to `[p_min, p_max]`. Reward:
//! the drop in leave-one-out error caused by the move. An episode is a
//! fixed number of steps at one sample point starting from `p_init`.

use serde::{Deserialize, Serialize};

use crate::dataset::{standardize_coords, Dataset, Point};
use crate::error::{Error, Result};
use crate::idw::loo_error;

/// Environment bounds and episode shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvConfig {
    pub p_min: f64,
    pub p_max: f64,
    pub p_init: f64,
    /// Steps per episode.
    pub episode_length: usize,
    /// Hard cap on episodes per learning run.
    pub episode_budget: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            p_min: 0.1,
            p_max: 20.0,
            p_init: 2.0,
            episode_length: 50,
            episode_budget: 5000,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.p_min && self.p_min < self.p_init && self.p_init < self.p_max) {
            return Err(Error::invalid_argument(format!(
                "power bounds need 0 < p_min < p_init < p_max, got {} / {} / {}",
                self.p_min, self.p_init, self.p_max
            )));
        }
        if self.episode_length == 0 {
            return Err(Error::invalid_argument(
                "episode_length must be >= 1".to_string(),
            ));
        }
        Ok(())
    }

    pub fn clamp_power(&self, p: f64) -> f64 {
        p.clamp(self.p_min, self.p_max)
    }
}

/// Q-network input for one step: standardized coordinates plus normalized
/// power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub std_x: f64,
    pub std_y: f64,
    pub p_norm: f64,
}

impl EnvState {
    pub fn to_input(self) -> [f64; 3] {
        [self.std_x, self.std_y, self.p_norm]
    }

    pub fn power(self, cfg: &EnvConfig) -> f64 {
        self.p_norm * cfg.p_max
    }
}

/// Environment step result. `loo_error` is the leave-one-out error at the
/// new power; drivers use it for best-so-far tracking and the training log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: EnvState,
    pub reward: f64,
    pub terminal: bool,
    pub loo_error: f64,
}

/// The environment over one dataset. Standardized coordinates feed the
/// network; leave-one-out errors are computed in raw coordinates.
#[derive(Debug, Clone)]
pub struct PowerEnv<'a> {
    dataset: &'a Dataset,
    std_coords: Vec<Point>,
    action_set: Vec<f64>,
    cfg: EnvConfig,
}

impl<'a> PowerEnv<'a> {
    pub fn new(dataset: &'a Dataset, action_set: Vec<f64>, cfg: EnvConfig) -> Result<Self> {
        cfg.validate()?;
        if action_set.is_empty() {
            return Err(Error::invalid_argument(
                "action_set must not be empty".to_string(),
            ));
        }
        if dataset.len() < 2 {
            return Err(Error::invalid_argument(
                "environment needs at least 2 samples".to_string(),
            ));
        }
        let (std_ds, _) = standardize_coords(dataset)?;
        let std_coords = std_ds.samples().iter().map(|s| s.position()).collect();
        Ok(PowerEnv {
            dataset,
            std_coords,
            action_set,
            cfg,
        })
    }

    pub fn cfg(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn dataset(&self) -> &Dataset {
        self.dataset
    }

    pub fn n_actions(&self) -> usize {
        self.action_set.len()
    }

    /// Initial state for an episode at sample `i` (power reset to p_init).
    pub fn reset(&self, i: usize) -> Result<EnvState> {
        let p = self
            .std_coords
            .get(i)
            .ok_or(Error::IndexOutOfRange {
                index: i,
                len: self.std_coords.len(),
            })?;
        Ok(EnvState {
            std_x: p.x,
            std_y: p.y,
            p_norm: self.cfg.p_init / self.cfg.p_max,
        })
    }

    /// Applies an action at sample `i`. `step_in_episode` is 0-based; the
    /// returned flag marks the episode's final step.
    pub fn step(
        &self,
        i: usize,
        state: &EnvState,
        action: usize,
        step_in_episode: usize,
    ) -> Result<StepOutcome> {
        let increment = *self.action_set.get(action).ok_or(Error::IndexOutOfRange {
            index: action,
            len: self.action_set.len(),
        })?;
        let p = state.power(&self.cfg);
        let p_next = self.cfg.clamp_power(p + increment);
        let loo_before = loo_error(self.dataset, i, p)?;
        let loo_after = if p_next == p {
            loo_before
        } else {
            loo_error(self.dataset, i, p_next)?
        };
        Ok(StepOutcome {
            state: EnvState {
                std_x: state.std_x,
                std_y: state.std_y,
                p_norm: p_next / self.cfg.p_max,
            },
            reward: loo_before - loo_after,
            terminal: step_in_episode + 1 >= self.cfg.episode_length,
            loo_error: loo_after,
        })
    }
}
