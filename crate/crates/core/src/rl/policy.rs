use std::f64::consts::{E, PI};

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::nn::Mlp;

/// Added inside the tanh log-Jacobian to keep it finite at saturation.
pub const SQUASH_EPS: f64 = 1e-6;
pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 1.0;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

/// Action component order produced by the policy.
pub const ACTION_STEER: usize = 0;
pub const ACTION_THROTTLE: usize = 1;
pub const ACTION_DIM: usize = 2;

/// Diagonal Gaussian over pre-squash actions `u`, with a state-independent
/// learned log standard deviation. Environment actions are `tanh(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPolicy {
    pub mean_net: Mlp,
    pub log_std: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicySample {
    /// Squashed action in `[-1, 1]`.
    pub action: Vec<f64>,
    pub pre_squash: Vec<f64>,
    pub log_prob: f64,
}

/// Log-density of `u` under `N(mean, diag(exp(2 log_std)))`, including the
/// tanh change-of-variables correction.
pub fn squashed_log_prob(mean: &[f64], log_std: &[f64], u: &[f64]) -> f64 {
    let mut lp = 0.0;
    for ((&m, &ls), &x) in mean.iter().zip(log_std).zip(u) {
        let z = (x - m) * (-ls).exp();
        let t = x.tanh();
        lp += -0.5 * z * z - ls - HALF_LN_2PI - (1.0 - t * t + SQUASH_EPS).ln();
    }
    lp
}

/// Entropy of the pre-squash Gaussian; independent of the observation.
pub fn gaussian_entropy(log_std: &[f64]) -> f64 {
    log_std.iter().map(|ls| ls + 0.5 * (2.0 * PI * E).ln()).sum()
}

impl GaussianPolicy {
    pub fn new(mean_net: Mlp, init_std: f64) -> Result<Self> {
        if !(init_std > 0.0) {
            return Err(Error::OutOfDomain {
                what: "initial policy std",
                value: init_std,
            });
        }
        let dim = mean_net.output_dim();
        Ok(GaussianPolicy {
            mean_net,
            log_std: vec![init_std.ln(); dim],
        })
    }

    pub fn obs_dim(&self) -> usize {
        self.mean_net.input_dim()
    }

    pub fn action_dim(&self) -> usize {
        self.log_std.len()
    }

    pub fn mean(&self, observation: &[f64]) -> Result<Vec<f64>> {
        self.mean_net.predict_one(observation)
    }

    /// Deterministic action `tanh(mean)`.
    pub fn mean_action(&self, observation: &[f64]) -> Result<Vec<f64>> {
        Ok(self.mean(observation)?.into_iter().map(f64::tanh).collect())
    }

    pub fn sample(&self, observation: &[f64], rng: &mut impl Rng) -> Result<PolicySample> {
        let mean = self.mean(observation)?;
        let pre_squash: Vec<f64> = mean
            .iter()
            .zip(&self.log_std)
            .map(|(&m, &ls)| {
                let n: f64 = StandardNormal.sample(rng);
                m + ls.exp() * n
            })
            .collect();
        let log_prob = squashed_log_prob(&mean, &self.log_std, &pre_squash);
        Ok(PolicySample {
            action: pre_squash.iter().map(|u| u.tanh()).collect(),
            pre_squash,
            log_prob,
        })
    }

    pub fn log_prob(&self, observation: &[f64], pre_squash: &[f64]) -> Result<f64> {
        if pre_squash.len() != self.action_dim() {
            return Err(Error::ShapeMismatch {
                context: "pre-squash action",
                expected: self.action_dim(),
                got: pre_squash.len(),
            });
        }
        let mean = self.mean(observation)?;
        Ok(squashed_log_prob(&mean, &self.log_std, pre_squash))
    }

    /// Batched log-probabilities together with their gradients.
    ///
    /// Returns `(log_probs, cache, d_logp/d_mean, d_logp/d_log_std)` where the
    /// mean gradient is per sample (rows) and is meant to be scaled and fed
    /// into [`Mlp::backward`].
    pub fn log_prob_batch(
        &self,
        observations: ArrayView2<f64>,
        pre_squash: ArrayView2<f64>,
    ) -> Result<LogProbBatch> {
        if pre_squash.ncols() != self.action_dim() || pre_squash.nrows() != observations.nrows() {
            return Err(Error::ShapeMismatch {
                context: "pre-squash batch",
                expected: self.action_dim(),
                got: pre_squash.ncols(),
            });
        }
        let cache = self.mean_net.forward(observations)?;
        let means = cache.output();
        let n = means.nrows();
        let mut log_probs = Vec::with_capacity(n);
        let mut d_mean = Array2::zeros(means.dim());
        let mut d_log_std = Array2::zeros(means.dim());
        for r in 0..n {
            let mean = means.row(r);
            let u = pre_squash.row(r);
            let mut lp = 0.0;
            for i in 0..self.action_dim() {
                let ls = self.log_std[i];
                let inv_std = (-ls).exp();
                let z = (u[i] - mean[i]) * inv_std;
                let t = u[i].tanh();
                lp += -0.5 * z * z - ls - HALF_LN_2PI - (1.0 - t * t + SQUASH_EPS).ln();
                d_mean[[r, i]] = z * inv_std;
                d_log_std[[r, i]] = z * z - 1.0;
            }
            log_probs.push(lp);
        }
        Ok(LogProbBatch {
            log_probs,
            cache,
            d_mean,
            d_log_std,
        })
    }

    pub fn clamp_log_std(&mut self) {
        for ls in &mut self.log_std {
            *ls = ls.clamp(LOG_STD_MIN, LOG_STD_MAX);
        }
    }
}

pub struct LogProbBatch {
    pub log_probs: Vec<f64>,
    pub cache: crate::nn::MlpCache,
    pub d_mean: Array2<f64>,
    pub d_log_std: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction {
    pub net: Mlp,
}

impl ValueFunction {
    pub fn new(net: Mlp) -> Result<Self> {
        if net.output_dim() != 1 {
            return Err(Error::ShapeMismatch {
                context: "value network output",
                expected: 1,
                got: net.output_dim(),
            });
        }
        Ok(ValueFunction { net })
    }

    pub fn value(&self, observation: &[f64]) -> Result<f64> {
        Ok(self.net.predict_one(observation)?[0])
    }
}
