//! Target computation for every variant, plus the reward-reshaping step.

use crate::error::{Error, Result};
use crate::nn::{HeadOutput, MlpParams};
use crate::rl::Transition;

/// Standardization floor: spreads at or below this count as degenerate and
/// z-score to all zeros. Matches the coordinate-standardization convention.
pub const ZSCORE_FLOOR: f64 = 1e-12;

/// How a dueling head folds (V, A) into Q values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregationMode {
    /// Q_a = V + A_a − max_a' A_a', which makes max_a Q equal V.
    Max,
    /// Q_a = V + A_a − mean(A), which makes mean_a Q equal V.
    Mean,
}

/// Folds value and advantage streams into one Q vector.
pub fn dueling_aggregate(value: f64, advantage: &[f64], mode: AggregationMode) -> Result<Vec<f64>> {
    if advantage.is_empty() {
        return Err(Error::invalid_argument(
            "advantage stream must not be empty".to_string(),
        ));
    }
    let offset = match mode {
        AggregationMode::Max => advantage.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        AggregationMode::Mean => advantage.iter().sum::<f64>() / advantage.len() as f64,
    };
    Ok(advantage.iter().map(|a| value + a - offset).collect())
}

/// Q values of a network at a state. Dueling heads use mean aggregation,
/// the form the dueling variants train with.
pub fn q_values(net: &MlpParams, state: &[f64]) -> Result<Vec<f64>> {
    match net.forward(state)? {
        HeadOutput::Single(q) => Ok(q),
        HeadOutput::Dueling { value, advantage } => {
            dueling_aggregate(value, &advantage, AggregationMode::Mean)
        }
    }
}

/// Argmax with ties broken toward the lowest index.
pub fn argmax_lowest(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in q.iter().enumerate().skip(1) {
        if v > q[best] {
            best = i;
        }
    }
    best
}

/// Classic target: y = r + γ·max_a' Q_target(s', a'), or just r on a
/// terminal transition.
pub fn dqn_target(t: &Transition, target_net: &MlpParams, gamma: f64) -> Result<f64> {
    if t.terminal {
        return Ok(t.reward);
    }
    let q = q_values(target_net, &t.next_state)?;
    let max_q = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(t.reward + gamma * max_q)
}

/// Double target: the online net picks the action, the target net scores
/// it. Never exceeds the classic target for the same nets.
pub fn ddqn_target(
    t: &Transition,
    online_net: &MlpParams,
    target_net: &MlpParams,
    gamma: f64,
) -> Result<f64> {
    if t.terminal {
        return Ok(t.reward);
    }
    let q_online = q_values(online_net, &t.next_state)?;
    let a_star = argmax_lowest(&q_online);
    let q_target = q_values(target_net, &t.next_state)?;
    Ok(t.reward + gamma * q_target[a_star])
}

/// Population z-score with the degenerate-spread floor: a batch whose
/// spread is at or below `ZSCORE_FLOOR` maps to all zeros.
pub fn zscore(xs: &[f64]) -> Vec<f64> {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd <= ZSCORE_FLOOR {
        vec![0.0; xs.len()]
    } else {
        xs.iter().map(|x| (x - mean) / sd).collect()
    }
}

/// Reshaped rewards R_j = r′_j + λ·SV_j over a minibatch, where r′ is the
/// z-scored raw reward and SV the z-scored value-stream output of the
/// online net at each state.
///
/// SV is read by a forward pass and used as a plain number, so no gradient
/// ever reaches the value stream through the reward term. λ = 0 is accepted
/// here for degeneration probes even though agent configs require (0, 1).
pub fn rsv_shape_rewards(
    batch: &[Transition],
    online_net: &MlpParams,
    lambda: f64,
) -> Result<Vec<f64>> {
    if batch.len() < 2 {
        return Err(Error::invalid_argument(
            "reward standardization needs a batch of >= 2".to_string(),
        ));
    }
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::invalid_argument(format!(
            "lambda must be in [0, 1), got {lambda}"
        )));
    }
    let rewards: Vec<f64> = batch.iter().map(|t| t.reward).collect();
    let r_std = zscore(&rewards);

    let mut values = Vec::with_capacity(batch.len());
    for t in batch {
        match online_net.forward(&t.state)? {
            HeadOutput::Dueling { value, .. } => values.push(value),
            HeadOutput::Single(_) => {
                return Err(Error::invalid_argument(
                    "reward reshaping needs a dueling head (no value stream on this net)"
                        .to_string(),
                ))
            }
        }
    }
    let sv_std = zscore(&values);

    Ok(r_std
        .iter()
        .zip(&sv_std)
        .map(|(r, sv)| r + lambda * sv)
        .collect())
}
