//! The deep Q-learning family: replay memory, ε-greedy policy, target
//! computation for DQN / DDQN / dueling DQN, and the reward-reshaped
//! dueling variant that feeds standardized state values back into the
//! reward signal.

mod agent;
mod replay;
mod targets;

pub use agent::{td_batch_gradients, Agent, TrainLogRecord, TrainOutcome, TrainStepStats};
pub use replay::{ReplayBuffer, Transition};
pub use targets::{
    argmax_lowest, ddqn_target, dqn_target, dueling_aggregate, q_values, rsv_shape_rewards,
    zscore, AggregationMode, ZSCORE_FLOOR,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::HeadMode;

/// Which target rule and head layout the agent trains with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "dqn")]
    Dqn,
    #[serde(rename = "ddqn")]
    Ddqn,
    #[serde(rename = "dudqn")]
    DuDqn,
    #[serde(rename = "rsv-dudqn")]
    RsvDuDqn,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Dqn,
        Variant::Ddqn,
        Variant::DuDqn,
        Variant::RsvDuDqn,
    ];

    pub fn head_mode(self) -> HeadMode {
        match self {
            Variant::Dqn | Variant::Ddqn => HeadMode::Single,
            Variant::DuDqn | Variant::RsvDuDqn => HeadMode::Dueling,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Dqn => "dqn",
            Variant::Ddqn => "ddqn",
            Variant::DuDqn => "dudqn",
            Variant::RsvDuDqn => "rsv-dudqn",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dqn" => Ok(Variant::Dqn),
            "ddqn" => Ok(Variant::Ddqn),
            "dudqn" => Ok(Variant::DuDqn),
            "rsv-dudqn" => Ok(Variant::RsvDuDqn),
            other => Err(Error::invalid_argument(format!(
                "unknown variant `{other}`; valid variants are dqn, ddqn, dudqn, rsv-dudqn"
            ))),
        }
    }
}

/// Exploration schedule: ε decays linearly from `start` to `end` over the
/// first `decay_episodes`, then stays at `end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_episodes: usize,
}

impl EpsilonSchedule {
    /// The default anneal: 1.0 → 0.05 over the first half of the episode
    /// budget.
    pub fn over_half(episode_budget: usize) -> Self {
        EpsilonSchedule {
            start: 1.0,
            end: 0.05,
            decay_episodes: (episode_budget / 2).max(1),
        }
    }

    pub fn constant(eps: f64) -> Self {
        EpsilonSchedule {
            start: eps,
            end: eps,
            decay_episodes: 1,
        }
    }

    pub fn value(&self, episode: usize) -> f64 {
        let t = (episode as f64 / self.decay_episodes as f64).min(1.0);
        self.start + (self.end - self.start) * t
    }
}

/// Full agent configuration. `seed` drives network init, exploration and
/// replay sampling through separate deterministic streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgentConfig {
    pub variant: Variant,
    pub gamma: f64,
    pub epsilon: EpsilonSchedule,
    /// Weight of the standardized state value in the reshaped reward
    /// (rsv-dudqn only).
    pub lambda: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Copy online → target every this many gradient steps.
    pub sync_period: usize,
    pub learning_rate: f64,
    pub hidden_sizes: Vec<usize>,
    /// Power increments selectable per step.
    pub action_set: Vec<f64>,
    pub seed: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            variant: Variant::RsvDuDqn,
            gamma: 0.9,
            epsilon: EpsilonSchedule::over_half(5000),
            lambda: 0.1,
            batch_size: 32,
            buffer_capacity: 10_000,
            sync_period: 200,
            learning_rate: 1e-3,
            hidden_sizes: vec![64, 64],
            action_set: default_action_set(),
            seed: 0,
        }
    }
}

pub fn default_action_set() -> Vec<f64> {
    vec![-1.0, -0.5, -0.1, 0.0, 0.1, 0.5, 1.0]
}

impl AgentConfig {
    /// Defaults wired for a given variant, seed and episode budget (the ε
    /// anneal spans the first half of the budget).
    pub fn new(variant: Variant, seed: u64, episode_budget: usize) -> Self {
        AgentConfig {
            variant,
            seed,
            epsilon: EpsilonSchedule::over_half(episode_budget),
            ..AgentConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return Err(Error::invalid_argument(format!(
                "gamma must be in [0, 1), got {}",
                self.gamma
            )));
        }
        if self.variant == Variant::RsvDuDqn && !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::invalid_argument(format!(
                "lambda must be strictly inside (0, 1) for rsv-dudqn, got {}",
                self.lambda
            )));
        }
        if self.batch_size < 2 {
            return Err(Error::invalid_argument(
                "batch_size must be >= 2".to_string(),
            ));
        }
        if self.buffer_capacity < self.batch_size {
            return Err(Error::invalid_argument(
                "buffer_capacity must be >= batch_size".to_string(),
            ));
        }
        if self.sync_period == 0 {
            return Err(Error::invalid_argument(
                "sync_period must be >= 1".to_string(),
            ));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::invalid_argument(
                "learning_rate must be > 0".to_string(),
            ));
        }
        if self.action_set.is_empty() {
            return Err(Error::invalid_argument(
                "action_set must not be empty".to_string(),
            ));
        }
        if self.action_set.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid_argument(
                "action_set entries must be finite".to_string(),
            ));
        }
        if !(self.epsilon.start >= 0.0
            && self.epsilon.start <= 1.0
            && self.epsilon.end >= 0.0
            && self.epsilon.end <= 1.0)
        {
            return Err(Error::invalid_argument(
                "epsilon bounds must be in [0, 1]".to_string(),
            ));
        }
        Ok(())
    }
}
