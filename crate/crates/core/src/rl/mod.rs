//! Actor-critic pieces: Gaussian policy, value function, GAE and PPO-Clip.

mod buffer;
mod gae;
mod policy;
mod ppo;

use rand::Rng;

pub use buffer::{RolloutBuffer, Transition};
pub use gae::{gae, normalize_advantages, GaeOutput};
pub use policy::{
    gaussian_entropy, squashed_log_prob, GaussianPolicy, LogProbBatch, PolicySample, ValueFunction,
    ACTION_DIM, ACTION_STEER, ACTION_THROTTLE, LOG_STD_MAX, LOG_STD_MIN, SQUASH_EPS,
};
pub use ppo::{
    buffer_targets, minibatch, minibatch_from_arrays, ppo_loss, ppo_update, surrogate_objective,
    Minibatch, PpoGrads, PpoHyper, PpoLoss, PpoOptimizer, UpdateStats,
};

use crate::error::Result;
use crate::nn::Mlp;

/// Separate policy and value networks sharing only the observation layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorCritic {
    pub policy: GaussianPolicy,
    pub value_fn: ValueFunction,
}

impl ActorCritic {
    pub fn new(obs_dim: usize, hyper: &PpoHyper, rng: &mut impl Rng) -> Result<Self> {
        let layer_sizes = |out: usize| {
            let mut s = vec![obs_dim];
            s.extend(&hyper.hidden);
            s.push(out);
            s
        };
        let mean_net = Mlp::new(&layer_sizes(ACTION_DIM), 0.01, rng)?;
        let value_net = Mlp::new(&layer_sizes(1), 1.0, rng)?;
        Ok(ActorCritic {
            policy: GaussianPolicy::new(mean_net, hyper.init_std)?,
            value_fn: ValueFunction::new(value_net)?,
        })
    }

    pub fn obs_dim(&self) -> usize {
        self.policy.obs_dim()
    }
}
