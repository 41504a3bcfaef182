use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GaeOutput {
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

/// Generalized advantage estimation, computed backwards over one horizon.
///
/// `dones[t]` marks that the transition at `t` ended its episode, so
/// neither the next value nor later advantages leak across the boundary.
/// `bootstrap_value` is `V(s_T)` for the state following the last step.
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap_value: f64,
    gamma: f64,
    lambda: f64,
) -> Result<GaeOutput> {
    let n = rewards.len();
    for (len, context) in [(values.len(), "gae values"), (dones.len(), "gae dones")] {
        if len != n {
            return Err(Error::ShapeMismatch {
                context,
                expected: n,
                got: len,
            });
        }
    }
    let mut advantages = vec![0.0; n];
    let mut next_adv = 0.0;
    let mut next_value = bootstrap_value;
    for t in (0..n).rev() {
        let mask = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * next_value * mask - values[t];
        next_adv = delta + gamma * lambda * mask * next_adv;
        advantages[t] = next_adv;
        next_value = values[t];
    }
    let returns = advantages.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok(GaeOutput { advantages, returns })
}

/// Shifts to zero mean and scales to unit variance (population std, with
/// `1e-8` added to the denominator).
pub fn normalize_advantages(advantages: &mut [f64]) {
    if advantages.is_empty() {
        return;
    }
    let n = advantages.len() as f64;
    let mean = advantages.iter().sum::<f64>() / n;
    let var = advantages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    let scale = 1.0 / (var.sqrt() + 1e-8);
    for a in advantages {
        *a = (*a - mean) * scale;
    }
}
