//! The training agent: online/target network pair, replay memory, ε-greedy
//! action selection and the per-variant gradient step.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Gradients, HeadOutput, MlpParams, TrainStepConfig};
use crate::rl::targets::{argmax_lowest, q_values, rsv_shape_rewards};
use crate::rl::{AgentConfig, ReplayBuffer, Transition, Variant};
use crate::rng::seeded_rng;

/// Result of a training attempt. `NotReady` means the buffer has fewer
/// transitions than one batch; nothing was touched.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainOutcome {
    NotReady,
    Stepped(TrainStepStats),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainStepStats {
    /// Mean squared TD error of the batch.
    pub loss: f64,
    /// Mean reshaped reward of the batch; only the rsv variant shapes
    /// rewards, others report `None`.
    pub shaped_reward_mean: Option<f64>,
}

/// One line of the training log (JSON-lines on disk). The environment
/// fields are filled by the training driver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLogRecord {
    pub step: usize,
    pub episode: usize,
    pub loss: f64,
    pub epsilon: f64,
    pub reward_raw: f64,
    pub reward_shaped: Option<f64>,
    pub p_current: f64,
    pub loo_error: f64,
}

/// Q-learning agent; exclusively owned by one training loop.
#[derive(Debug, Clone)]
pub struct Agent {
    cfg: AgentConfig,
    online: MlpParams,
    target: MlpParams,
    buffer: ReplayBuffer,
    train_steps: usize,
    sync_events: usize,
    episode: usize,
    rng: ChaCha8Rng,
}

impl Agent {
    /// Builds the online net (seeded init), clones it into the target net
    /// and allocates the replay buffer.
    pub fn new(cfg: AgentConfig, input_dim: usize) -> Result<Self> {
        cfg.validate()?;
        let mut init_rng = seeded_rng(cfg.seed, "agent-init");
        let online = MlpParams::new(
            input_dim,
            &cfg.hidden_sizes,
            cfg.action_set.len(),
            cfg.variant.head_mode(),
            &mut init_rng,
        )?;
        let target = online.clone();
        let buffer = ReplayBuffer::new(cfg.buffer_capacity)?;
        let rng = seeded_rng(cfg.seed, "agent-run");
        Ok(Agent {
            cfg,
            online,
            target,
            buffer,
            train_steps: 0,
            sync_events: 0,
            episode: 0,
            rng,
        })
    }

    pub fn cfg(&self) -> &AgentConfig {
        &self.cfg
    }

    pub fn online(&self) -> &MlpParams {
        &self.online
    }

    pub fn target(&self) -> &MlpParams {
        &self.target
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn train_steps(&self) -> usize {
        self.train_steps
    }

    pub fn sync_events(&self) -> usize {
        self.sync_events
    }

    /// Tells the agent which episode it is in; the ε schedule is a function
    /// of the episode index.
    pub fn begin_episode(&mut self, episode: usize) {
        self.episode = episode;
    }

    pub fn epsilon(&self) -> f64 {
        self.cfg.epsilon.value(self.episode)
    }

    /// ε-greedy action: a uniform index with probability ε, otherwise the
    /// argmax of the online Q values with ties broken toward index 0. One
    /// uniform draw is always consumed, so the stream advances identically
    /// on both branches.
    pub fn select_action(&mut self, state: &[f64]) -> Result<usize> {
        let eps = self.epsilon();
        let u: f64 = self.rng.random();
        if u < eps {
            Ok(self.rng.random_range(0..self.cfg.action_set.len()))
        } else {
            let q = q_values(&self.online, state)?;
            Ok(argmax_lowest(&q))
        }
    }

    /// Stores a transition after validating it against the action set.
    pub fn push_transition(&mut self, t: Transition) -> Result<()> {
        if t.action >= self.cfg.action_set.len() {
            return Err(Error::IndexOutOfRange {
                index: t.action,
                len: self.cfg.action_set.len(),
            });
        }
        if !t.reward.is_finite() {
            return Err(Error::NonFinite(format!("reward {}", t.reward)));
        }
        self.buffer.push(t);
        Ok(())
    }

    /// Copies the online parameters into the target network.
    pub fn sync_target(&mut self) {
        self.target = self.online.clone();
        self.sync_events += 1;
    }

    /// Samples a minibatch, builds per-variant targets, and applies one SGD
    /// step on the mean squared TD error. Syncs the target net every
    /// `sync_period` completed steps.
    pub fn train_step(&mut self) -> Result<TrainOutcome> {
        let batch_size = self.cfg.batch_size;
        if self.buffer.len() < batch_size {
            return Ok(TrainOutcome::NotReady);
        }

        let picked = rand::seq::index::sample(&mut self.rng, self.buffer.len(), batch_size);
        let batch: Vec<Transition> = picked
            .iter()
            .map(|i| self.buffer.get(i).expect("sampled index in range").clone())
            .collect();

        // Per-transition effective rewards.
        let (rewards, shaped_reward_mean) = match self.cfg.variant {
            Variant::RsvDuDqn => {
                let shaped = rsv_shape_rewards(&batch, &self.online, self.cfg.lambda)?;
                let mean = shaped.iter().sum::<f64>() / shaped.len() as f64;
                (shaped, Some(mean))
            }
            _ => (batch.iter().map(|t| t.reward).collect(), None),
        };

        // Targets: terminal → reward only; otherwise bootstrap off the
        // target net (DDQN lets the online net pick the action first).
        let mut targets = Vec::with_capacity(batch_size);
        for (t, &r) in batch.iter().zip(&rewards) {
            let y = if t.terminal {
                r
            } else {
                let boot = match self.cfg.variant {
                    Variant::Ddqn => {
                        let q_online = q_values(&self.online, &t.next_state)?;
                        let a_star = argmax_lowest(&q_online);
                        q_values(&self.target, &t.next_state)?[a_star]
                    }
                    _ => {
                        let q = q_values(&self.target, &t.next_state)?;
                        q.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                    }
                };
                r + self.cfg.gamma * boot
            };
            targets.push(y);
        }

        let (loss, grads) = td_batch_gradients(&self.online, &batch, &targets)?;
        self.online
            .sgd_step(&grads, &TrainStepConfig::new(self.cfg.learning_rate))?;
        self.train_steps += 1;
        if self.train_steps.is_multiple_of(self.cfg.sync_period) {
            self.sync_target();
        }

        Ok(TrainOutcome::Stepped(TrainStepStats {
            loss,
            shaped_reward_mean,
        }))
    }
}

/// Mean squared TD error over a batch and its parameter gradients, with
/// the targets treated as constants (semi-gradient). Dueling heads are
/// trained through mean aggregation: dQ/dV = 1, dQ/dA_b = δ_ab − 1/n.
pub fn td_batch_gradients(
    net: &MlpParams,
    batch: &[Transition],
    targets: &[f64],
) -> Result<(f64, Gradients)> {
    if batch.is_empty() || batch.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: batch.len(),
            got: targets.len(),
        });
    }
    let n_actions = net.n_actions();
    let mut grads = Gradients::zeros_like(net);
    let mut loss_sum = 0.0;
    let inv = 1.0 / batch.len() as f64;
    for (t, &y) in batch.iter().zip(targets) {
        let out = net.forward(&t.state)?;
        let (q_sa, out_grad) = match out {
            HeadOutput::Single(q) => {
                let q_sa = q[t.action];
                let mut g = vec![0.0; n_actions];
                g[t.action] = 2.0 * (q_sa - y) * inv;
                (q_sa, g)
            }
            HeadOutput::Dueling { value, advantage } => {
                let mean_a = advantage.iter().sum::<f64>() / n_actions as f64;
                let q_sa = value + advantage[t.action] - mean_a;
                let g = 2.0 * (q_sa - y) * inv;
                let mut out_grad = vec![0.0; 1 + n_actions];
                out_grad[0] = g;
                for b in 0..n_actions {
                    let indicator = if b == t.action { 1.0 } else { 0.0 };
                    out_grad[1 + b] = g * (indicator - 1.0 / n_actions as f64);
                }
                (q_sa, out_grad)
            }
        };
        loss_sum += (q_sa - y) * (q_sa - y);
        net.backward_into(&t.state, &out_grad, &mut grads)?;
    }
    Ok((loss_sum * inv, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rl::EpsilonSchedule;

    fn base_cfg(variant: Variant, seed: u64) -> AgentConfig {
        AgentConfig {
            variant,
            seed,
            batch_size: 4,
            buffer_capacity: 64,
            sync_period: 5,
            epsilon: EpsilonSchedule::constant(0.0),
            ..AgentConfig::new(variant, seed, 100)
        }
    }

    fn push_n(agent: &mut Agent, n: usize, terminal: bool) {
        for k in 0..n {
            agent
                .push_transition(Transition {
                    state: vec![0.01 * k as f64, 0.5, 0.3],
                    action: k % agent.cfg().action_set.len(),
                    reward: (k as f64 * 0.1).sin(),
                    next_state: vec![0.01 * k as f64 + 0.1, 0.5, 0.35],
                    terminal,
                })
                .unwrap();
        }
    }

    #[test]
    fn select_action_is_argmax_when_greedy() {
        let mut agent = Agent::new(base_cfg(Variant::Dqn, 7), 3).unwrap();
        let s = [0.2, -0.1, 0.4];
        let q = q_values(agent.online(), &s).unwrap();
        let expect = argmax_lowest(&q);
        assert_eq!(agent.select_action(&s).unwrap(), expect);
    }

    #[test]
    fn select_action_uniform_when_exploring() {
        let mut cfg = base_cfg(Variant::Dqn, 3);
        cfg.epsilon = EpsilonSchedule::constant(1.0);
        let mut agent = Agent::new(cfg, 3).unwrap();
        let s = [0.0, 0.0, 0.0];
        let n = agent.cfg().action_set.len();
        let mut counts = vec![0usize; n];
        let draws = 70_000;
        for _ in 0..draws {
            counts[agent.select_action(&s).unwrap()] += 1;
        }
        let p = 1.0 / n as f64;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for (i, &c) in counts.iter().enumerate() {
            let dev = (c as f64 - draws as f64 * p).abs();
            assert!(dev <= 3.0 * sigma, "action {i}: count {c}, dev {dev}");
        }
    }

    #[test]
    fn train_not_ready_below_batch() {
        let mut agent = Agent::new(base_cfg(Variant::Dqn, 1), 3).unwrap();
        push_n(&mut agent, 3, false);
        let before = agent.online().flat_params();
        assert_eq!(agent.train_step().unwrap(), TrainOutcome::NotReady);
        assert_eq!(agent.online().flat_params(), before);
        assert_eq!(agent.train_steps(), 0);
    }

    #[test]
    fn sync_schedule_fires_at_multiples() {
        let mut agent = Agent::new(base_cfg(Variant::Dqn, 2), 3).unwrap();
        push_n(&mut agent, 16, false);
        for step in 1..=15 {
            match agent.train_step().unwrap() {
                TrainOutcome::Stepped(_) => {}
                TrainOutcome::NotReady => panic!("buffer was primed"),
            }
            assert_eq!(agent.sync_events(), step / 5, "after step {step}");
        }
        assert_eq!(agent.sync_events(), 3);
    }

    #[test]
    fn sync_copies_and_isolates() {
        let mut agent = Agent::new(base_cfg(Variant::DuDqn, 4), 3).unwrap();
        push_n(&mut agent, 8, false);
        agent.train_step().unwrap();
        agent.sync_target();
        let probe = [0.3, 0.3, 0.1];
        assert_eq!(
            agent.online().forward(&probe).unwrap(),
            agent.target().forward(&probe).unwrap()
        );
        let target_before = agent.target().flat_params();
        agent.train_step().unwrap();
        assert_eq!(agent.target().flat_params(), target_before);
        assert_ne!(agent.online().flat_params(), target_before);
    }

    #[test]
    fn regression_to_constant_target() {
        // γ = 0 and a single repeated transition: the TD loss is a plain
        // regression onto r and must collapse under SGD.
        for variant in [Variant::Dqn, Variant::DuDqn] {
            let mut cfg = base_cfg(variant, 6);
            cfg.gamma = 0.0;
            cfg.learning_rate = 5e-2;
            cfg.batch_size = 4;
            let mut agent = Agent::new(cfg, 3).unwrap();
            for _ in 0..4 {
                agent
                    .push_transition(Transition {
                        state: vec![0.5, -0.2, 0.8],
                        action: 2,
                        reward: 0.75,
                        next_state: vec![0.5, -0.2, 0.8],
                        terminal: false,
                    })
                    .unwrap();
            }
            let first = match agent.train_step().unwrap() {
                TrainOutcome::Stepped(s) => s.loss,
                _ => panic!(),
            };
            let mut last = first;
            for _ in 0..200 {
                if let TrainOutcome::Stepped(s) = agent.train_step().unwrap() {
                    last = s.loss;
                }
            }
            assert!(
                last < first * 1e-3,
                "{variant}: loss {first} -> {last} did not collapse"
            );
        }
    }

    #[test]
    fn cloned_agents_follow_identical_trajectories() {
        let mut a = Agent::new(base_cfg(Variant::RsvDuDqn, 11), 3).unwrap();
        push_n(&mut a, 12, false);
        let mut b = a.clone();
        for _ in 0..6 {
            let ra = a.train_step().unwrap();
            let rb = b.train_step().unwrap();
            assert_eq!(ra, rb);
        }
        assert_eq!(a.online().flat_params(), b.online().flat_params());
    }

    #[test]
    fn push_validates_action_and_reward() {
        let mut agent = Agent::new(base_cfg(Variant::Dqn, 1), 3).unwrap();
        let bad_action = Transition {
            state: vec![0.0; 3],
            action: 99,
            reward: 0.0,
            next_state: vec![0.0; 3],
            terminal: false,
        };
        assert!(agent.push_transition(bad_action).is_err());
        let bad_reward = Transition {
            state: vec![0.0; 3],
            action: 0,
            reward: f64::NAN,
            next_state: vec![0.0; 3],
            terminal: false,
        };
        assert!(agent.push_transition(bad_reward).is_err());
    }
}
