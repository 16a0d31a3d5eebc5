//! The learning loop: one shared agent, episodes round-robin over sample
//! points, best-so-far power tracking per point.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::hyperfield::env::{EnvConfig, PowerEnv};
use crate::idw::loo_error;
use crate::rl::{Agent, AgentConfig, TrainLogRecord, TrainOutcome, Transition};

/// The learned power of one sample point and the leave-one-out error it
/// achieved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerEntry {
    pub index: usize,
    pub x: f64,
    pub y: f64,
    pub power: f64,
    pub loo_error: f64,
}

/// Per-point best powers for a dataset; the support set of a power field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAssignment {
    pub dataset_name: String,
    pub p_min: f64,
    pub p_max: f64,
    pub entries: Vec<PowerEntry>,
}

impl PowerAssignment {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Checks that the assignment covers exactly the dataset's points.
    pub fn check_covers(&self, dataset: &Dataset) -> Result<()> {
        if self.entries.len() != dataset.len() {
            return Err(Error::invalid_argument(format!(
                "assignment has {} entries for a dataset of {}",
                self.entries.len(),
                dataset.len()
            )));
        }
        for (i, e) in self.entries.iter().enumerate() {
            if e.index != i {
                return Err(Error::invalid_argument(format!(
                    "assignment entry {i} carries index {}",
                    e.index
                )));
            }
            let s = dataset.get(i)?;
            if s.x != e.x || s.y != e.y {
                return Err(Error::invalid_argument(format!(
                    "assignment entry {i} coordinates ({}, {}) do not match dataset ({}, {})",
                    e.x, e.y, s.x, s.y
                )));
            }
        }
        Ok(())
    }
}

/// Everything a learning run produces: the assignment plus the material
/// needed for logs and convergence reporting.
#[derive(Debug, Clone)]
pub struct LearnOutcome {
    pub assignment: PowerAssignment,
    /// One record per gradient step.
    pub log: Vec<TrainLogRecord>,
    /// Leave-one-out error at each episode's final power.
    pub episode_errors: Vec<f64>,
    pub wall_seconds: f64,
}

/// Runs the full power search: for each episode the next sample point (in
/// round-robin order) is reset to `p_init` and walked for
/// `episode_length` steps while the shared agent trains off-policy from
/// replay. Every point's record starts at `(p_init, loo(p_init))`, so a
/// point no episode reaches still gets the fallback, and the recorded
/// error can only improve from there.
pub fn learn_powers(
    dataset: &Dataset,
    agent_cfg: &AgentConfig,
    env_cfg: &EnvConfig,
) -> Result<LearnOutcome> {
    if dataset.len() < 3 {
        return Err(Error::invalid_argument(
            "power learning needs at least 3 samples".to_string(),
        ));
    }
    let started = Instant::now();
    let env = PowerEnv::new(dataset, agent_cfg.action_set.clone(), *env_cfg)?;
    let mut agent = Agent::new(agent_cfg.clone(), 3)?;

    let n = dataset.len();
    let mut best: Vec<(f64, f64)> = Vec::with_capacity(n);
    for i in 0..n {
        best.push((env_cfg.p_init, loo_error(dataset, i, env_cfg.p_init)?));
    }

    let mut log = Vec::new();
    let mut episode_errors = Vec::with_capacity(env_cfg.episode_budget);
    for episode in 0..env_cfg.episode_budget {
        let i = episode % n;
        agent.begin_episode(episode);
        let mut state = env.reset(i)?;
        // Overwritten on the first step; episode_length >= 1 is validated.
        let mut last_loo = best[i].1;
        for t in 0..env_cfg.episode_length {
            let action = agent.select_action(&state.to_input())?;
            let out = env.step(i, &state, action, t)?;
            agent.push_transition(Transition {
                state: state.to_input().to_vec(),
                action,
                reward: out.reward,
                next_state: out.state.to_input().to_vec(),
                terminal: out.terminal,
            })?;

            let p_next = out.state.power(env_cfg);
            if out.loo_error < best[i].1 {
                best[i] = (p_next, out.loo_error);
            }
            last_loo = out.loo_error;

            if let TrainOutcome::Stepped(stats) = agent.train_step()? {
                log.push(TrainLogRecord {
                    step: agent.train_steps(),
                    episode,
                    loss: stats.loss,
                    epsilon: agent.epsilon(),
                    reward_raw: out.reward,
                    reward_shaped: stats.shaped_reward_mean,
                    p_current: p_next,
                    loo_error: out.loo_error,
                });
            }
            state = out.state;
        }
        episode_errors.push(last_loo);
        if (episode + 1) % 500 == 0 {
            log::info!(
                "episode {}/{} ({})",
                episode + 1,
                env_cfg.episode_budget,
                agent_cfg.variant
            );
        }
    }

    let entries = best
        .iter()
        .enumerate()
        .map(|(i, &(power, err))| {
            let s = dataset.samples()[i];
            PowerEntry {
                index: i,
                x: s.x,
                y: s.y,
                power,
                loo_error: err,
            }
        })
        .collect();

    Ok(LearnOutcome {
        assignment: PowerAssignment {
            dataset_name: dataset.name().to_string(),
            p_min: env_cfg.p_min,
            p_max: env_cfg.p_max,
            entries,
        },
        log,
        episode_errors,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}
