//! Clipped-surrogate PPO loss and the K-epoch minibatch update.

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::buffer::RolloutBuffer;
use super::gae::{gae, normalize_advantages};
use super::policy::{gaussian_entropy, GaussianPolicy, ValueFunction};
use crate::error::{Error, Result};
use crate::nn::AdamState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PpoHyper {
    pub clip_epsilon: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub value_loss_scale: f64,
    pub entropy_scale: f64,
    pub learning_rate: f64,
    pub horizon: usize,
    pub init_std: f64,
    pub hidden: Vec<usize>,
    pub normalize_advantages: bool,
}

impl Default for PpoHyper {
    fn default() -> Self {
        PpoHyper {
            clip_epsilon: 0.2,
            gamma: 0.99,
            gae_lambda: 0.95,
            epochs: 3,
            minibatch_size: 32,
            value_loss_scale: 1.0,
            entropy_scale: 0.01,
            learning_rate: 1e-4,
            horizon: 128,
            init_std: 0.4,
            hidden: vec![64, 64],
            normalize_advantages: true,
        }
    }
}

impl PpoHyper {
    pub fn validate(&self) -> Result<()> {
        let ok = self.clip_epsilon > 0.0
            && self.clip_epsilon < 1.0
            && self.gamma > 0.0
            && self.gae_lambda >= 0.0
            && self.epochs > 0
            && self.minibatch_size > 0
            && self.horizon > 0
            && self.learning_rate >= 0.0
            && self.init_std > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("ppo hyperparameters {self:?}")))
        }
    }
}

/// A batch ready for the surrogate loss.
#[derive(Debug, Clone)]
pub struct Minibatch {
    pub observations: Array2<f64>,
    pub pre_squash: Array2<f64>,
    pub log_prob_old: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl Minibatch {
    pub fn len(&self) -> usize {
        self.log_prob_old.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_prob_old.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PpoLoss {
    pub total: f64,
    pub policy_term: f64,
    pub value_term: f64,
    pub entropy_term: f64,
    pub mean_ratio: f64,
    pub clip_fraction: f64,
}

/// Gradients of [`PpoLoss::total`].
#[derive(Debug, Clone, PartialEq)]
pub struct PpoGrads {
    pub mean_net: Vec<f64>,
    pub log_std: Vec<f64>,
    pub value_net: Vec<f64>,
}

/// `total = policy_term + c_v * value_term - c_e * entropy_term`, where
/// `policy_term = -mean(min(rho A, clip(rho, 1-eps, 1+eps) A))`.
pub fn ppo_loss(
    policy: &GaussianPolicy,
    value_fn: &ValueFunction,
    batch: &Minibatch,
    hyper: &PpoHyper,
) -> Result<(PpoLoss, PpoGrads)> {
    if batch.is_empty() {
        return Err(Error::Empty("ppo minibatch"));
    }
    let n = batch.len();
    let inv_n = 1.0 / n as f64;
    let eps = hyper.clip_epsilon;
    let lp = policy.log_prob_batch(batch.observations.view(), batch.pre_squash.view())?;

    let mut policy_term = 0.0;
    let mut ratio_sum = 0.0;
    let mut clipped = 0usize;
    // d policy_term / d log_prob_new per sample
    let mut d_logp = vec![0.0; n];
    for i in 0..n {
        let ratio = (lp.log_probs[i] - batch.log_prob_old[i]).exp();
        let adv = batch.advantages[i];
        let unclipped = ratio * adv;
        let clipped_obj = ratio.clamp(1.0 - eps, 1.0 + eps) * adv;
        ratio_sum += ratio;
        if clipped_obj < unclipped {
            policy_term -= clipped_obj;
            clipped += 1;
        } else {
            policy_term -= unclipped;
            d_logp[i] = -adv * ratio * inv_n;
        }
    }
    policy_term *= inv_n;

    let mut d_mean = lp.d_mean;
    let mut log_std_grad = vec![0.0; policy.action_dim()];
    for i in 0..n {
        for (j, g) in log_std_grad.iter_mut().enumerate() {
            *g += d_logp[i] * lp.d_log_std[[i, j]];
        }
        d_mean.row_mut(i).mapv_inplace(|g| g * d_logp[i]);
    }
    let entropy = gaussian_entropy(&policy.log_std);
    for g in &mut log_std_grad {
        *g -= hyper.entropy_scale;
    }
    let (mean_grads, _) = policy.mean_net.backward(&lp.cache, d_mean.view())?;

    let value_cache = value_fn.net.forward(batch.observations.view())?;
    let predictions = value_cache.output();
    let mut value_term = 0.0;
    let mut d_value = Array2::zeros((n, 1));
    for i in 0..n {
        let err = predictions[[i, 0]] - batch.returns[i];
        value_term += err * err;
        d_value[[i, 0]] = 2.0 * err * inv_n * hyper.value_loss_scale;
    }
    value_term *= inv_n;
    let (value_grads, _) = value_fn.net.backward(&value_cache, d_value.view())?;

    let total = policy_term + hyper.value_loss_scale * value_term - hyper.entropy_scale * entropy;
    Ok((
        PpoLoss {
            total,
            policy_term,
            value_term,
            entropy_term: entropy,
            mean_ratio: ratio_sum * inv_n,
            clip_fraction: clipped as f64 * inv_n,
        },
        PpoGrads {
            mean_net: mean_grads,
            log_std: log_std_grad,
            value_net: value_grads,
        },
    ))
}

/// Adam moments for every parameter group touched by [`ppo_update`].
#[derive(Debug, Clone, PartialEq)]
pub struct PpoOptimizer {
    pub mean_net: AdamState,
    pub log_std: AdamState,
    pub value_net: AdamState,
}

impl PpoOptimizer {
    pub fn new(policy: &GaussianPolicy, value_fn: &ValueFunction) -> Self {
        PpoOptimizer {
            mean_net: AdamState::new(policy.mean_net.params().len()),
            log_std: AdamState::new(policy.log_std.len()),
            value_net: AdamState::new(value_fn.net.params().len()),
        }
    }

    pub fn apply(
        &mut self,
        policy: &mut GaussianPolicy,
        value_fn: &mut ValueFunction,
        grads: &PpoGrads,
        lr: f64,
    ) -> Result<()> {
        self.mean_net.step(policy.mean_net.params_mut(), &grads.mean_net, lr)?;
        self.log_std.step(&mut policy.log_std, &grads.log_std, lr)?;
        self.value_net.step(value_fn.net.params_mut(), &grads.value_net, lr)?;
        policy.clamp_log_std();
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub mean_ratio: f64,
    pub clip_fraction: f64,
    pub minibatches: usize,
}

/// Advantages and returns for a full buffer, normalized when configured.
pub fn buffer_targets(
    buffer: &RolloutBuffer,
    bootstrap_value: f64,
    hyper: &PpoHyper,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let t = buffer.transitions();
    let rewards: Vec<f64> = t.iter().map(|x| x.reward).collect();
    let values: Vec<f64> = t.iter().map(|x| x.value).collect();
    let dones: Vec<bool> = t.iter().map(|x| x.done).collect();
    let out = gae(&rewards, &values, &dones, bootstrap_value, hyper.gamma, hyper.gae_lambda)?;
    let mut advantages = out.advantages;
    if hyper.normalize_advantages {
        normalize_advantages(&mut advantages);
    }
    Ok((advantages, out.returns))
}

pub fn minibatch(buffer: &RolloutBuffer, idx: &[usize], advantages: &[f64], returns: &[f64]) -> Minibatch {
    let t = buffer.transitions();
    Minibatch {
        observations: buffer.stack(idx, |x| &x.observation),
        pre_squash: buffer.stack(idx, |x| &x.pre_squash),
        log_prob_old: idx.iter().map(|&i| t[i].log_prob).collect(),
        advantages: idx.iter().map(|&i| advantages[i]).collect(),
        returns: idx.iter().map(|&i| returns[i]).collect(),
    }
}

/// Runs `hyper.epochs` passes of shuffled minibatch Adam steps over a full
/// buffer. GAE is computed once, before any parameter changes.
pub fn ppo_update(
    policy: &mut GaussianPolicy,
    value_fn: &mut ValueFunction,
    buffer: &RolloutBuffer,
    bootstrap_value: f64,
    hyper: &PpoHyper,
    optimizer: &mut PpoOptimizer,
    rng: &mut impl Rng,
) -> Result<UpdateStats> {
    buffer.require_full()?;
    let (advantages, returns) = buffer_targets(buffer, bootstrap_value, hyper)?;
    let mut order: Vec<usize> = (0..buffer.len()).collect();
    let mut stats = UpdateStats::default();
    for _ in 0..hyper.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(hyper.minibatch_size) {
            let batch = minibatch(buffer, chunk, &advantages, &returns);
            let (loss, grads) = ppo_loss(policy, value_fn, &batch, hyper)?;
            optimizer.apply(policy, value_fn, &grads, hyper.learning_rate)?;
            stats.policy_loss += loss.policy_term;
            stats.value_loss += loss.value_term;
            stats.entropy += loss.entropy_term;
            stats.mean_ratio += loss.mean_ratio;
            stats.clip_fraction += loss.clip_fraction;
            stats.minibatches += 1;
        }
    }
    let k = stats.minibatches.max(1) as f64;
    stats.policy_loss /= k;
    stats.value_loss /= k;
    stats.entropy /= k;
    stats.mean_ratio /= k;
    stats.clip_fraction /= k;
    Ok(stats)
}

/// Mean clipped surrogate objective (to be maximized) of `batch`.
pub fn surrogate_objective(policy: &GaussianPolicy, batch: &Minibatch, clip_epsilon: f64) -> Result<f64> {
    let lp = policy.log_prob_batch(batch.observations.view(), batch.pre_squash.view())?;
    let n = batch.len() as f64;
    Ok(lp
        .log_probs
        .iter()
        .zip(&batch.log_prob_old)
        .zip(&batch.advantages)
        .map(|((new, old), adv)| {
            let r = (new - old).exp();
            (r * adv).min(r.clamp(1.0 - clip_epsilon, 1.0 + clip_epsilon) * adv)
        })
        .sum::<f64>()
        / n)
}

/// Builds a minibatch directly from arrays (tests and tools).
pub fn minibatch_from_arrays(
    observations: ArrayView2<f64>,
    pre_squash: ArrayView2<f64>,
    log_prob_old: Vec<f64>,
    advantages: Vec<f64>,
    returns: Vec<f64>,
) -> Minibatch {
    Minibatch {
        observations: observations.to_owned(),
        pre_squash: pre_squash.to_owned(),
        log_prob_old,
        advantages,
        returns,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rl::{ActorCritic, Transition};
    use ndarray::Array2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(seed: u64) -> ActorCritic {
        let hyper = PpoHyper {
            hidden: vec![5],
            ..PpoHyper::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = ActorCritic::new(3, &hyper, &mut rng).unwrap();
        // larger output weights so the mean actually depends on the input
        for p in m.policy.mean_net.params_mut() {
            *p *= 20.0;
        }
        m
    }

    fn batch(m: &ActorCritic, shifts: &[f64], advantages: &[f64], seed: u64) -> Minibatch {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = shifts.len();
        let obs = Array2::from_shape_fn((n, 3), |(r, c)| ((r * 3 + c) as f64 * 0.37).sin());
        let mut pre = Array2::zeros((n, 2));
        let mut old = Vec::new();
        for r in 0..n {
            let s = m.policy.sample(obs.row(r).as_slice().unwrap(), &mut rng).unwrap();
            pre.row_mut(r).assign(&ndarray::arr1(&s.pre_squash));
            old.push(s.log_prob + shifts[r]);
        }
        Minibatch {
            observations: obs,
            pre_squash: pre,
            log_prob_old: old,
            advantages: advantages.to_vec(),
            returns: (0..n).map(|i| i as f64 * 0.3 - 0.2).collect(),
        }
    }

    fn total(m: &ActorCritic, b: &Minibatch, h: &PpoHyper) -> f64 {
        ppo_loss(&m.policy, &m.value_fn, b, h).unwrap().0.total
    }

    #[test]
    fn total_loss_gradient_matches_finite_differences() {
        let m = model(4);
        // ratios of exp(-shift): two inside the clip range, one clipped
        let b = batch(&m, &[0.05, -0.1, -0.6], &[0.7, -1.2, 0.9], 1);
        let h = PpoHyper::default();
        let (_, g) = ppo_loss(&m.policy, &m.value_fn, &b, &h).unwrap();
        let step = 1e-5;
        let check = |analytic: f64, plus: f64, minus: f64| {
            let fd = (plus - minus) / (2.0 * step);
            let err = (analytic - fd).abs();
            assert!(err <= 1e-4 * analytic.abs().max(fd.abs()) + 1e-9, "{analytic} vs {fd}");
        };
        for i in 0..m.policy.mean_net.params().len() {
            let (mut p, mut q) = (m.clone(), m.clone());
            p.policy.mean_net.params_mut()[i] += step;
            q.policy.mean_net.params_mut()[i] -= step;
            check(g.mean_net[i], total(&p, &b, &h), total(&q, &b, &h));
        }
        for i in 0..2 {
            let (mut p, mut q) = (m.clone(), m.clone());
            p.policy.log_std[i] += step;
            q.policy.log_std[i] -= step;
            check(g.log_std[i], total(&p, &b, &h), total(&q, &b, &h));
        }
        for i in 0..m.value_fn.net.params().len() {
            let (mut p, mut q) = (m.clone(), m.clone());
            p.value_fn.net.params_mut()[i] += step;
            q.value_fn.net.params_mut()[i] -= step;
            check(g.value_net[i], total(&p, &b, &h), total(&q, &b, &h));
        }
    }

    #[test]
    fn clipped_samples_have_no_policy_gradient() {
        let m = model(2);
        let h = PpoHyper {
            entropy_scale: 0.0,
            ..PpoHyper::default()
        };
        // A > 0 with ratio e^0.5 > 1.2, and A < 0 with ratio e^-0.5 < 0.8
        let b = batch(&m, &[-0.5, 0.5], &[1.0, -1.0], 3);
        let (loss, g) = ppo_loss(&m.policy, &m.value_fn, &b, &h).unwrap();
        assert_eq!(loss.clip_fraction, 1.0);
        assert!(g.mean_net.iter().all(|&x| x == 0.0));
        assert!(g.log_std.iter().all(|&x| x == 0.0));
        assert!((loss.policy_term - (-(1.2 * 1.0) + 0.8 * 1.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn fresh_batch_has_unit_ratio() {
        let m = model(7);
        let b = batch(&m, &[0.0; 6], &[1.0; 6], 5);
        let (loss, _) = ppo_loss(&m.policy, &m.value_fn, &b, &PpoHyper::default()).unwrap();
        assert!((loss.mean_ratio - 1.0).abs() < 1e-12);
        assert_eq!(loss.clip_fraction, 0.0);
    }

    fn filled_buffer(m: &ActorCritic, n: usize) -> RolloutBuffer {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut buf = RolloutBuffer::new(n);
        for t in 0..n {
            let obs = vec![(t as f64).sin(), 0.5, -0.25];
            let s = m.policy.sample(&obs, &mut rng).unwrap();
            buf.push(Transition {
                value: m.value_fn.value(&obs).unwrap(),
                observation: obs,
                pre_squash: s.pre_squash,
                log_prob: s.log_prob,
                reward: s.action[0],
                done: t % 5 == 4,
            })
            .unwrap();
        }
        buf
    }

    #[test]
    fn zero_learning_rate_changes_nothing() {
        let m = model(1);
        let buf = filled_buffer(&m, 16);
        let h = PpoHyper {
            learning_rate: 0.0,
            minibatch_size: 4,
            ..PpoHyper::default()
        };
        let (mut policy, mut value_fn) = (m.policy.clone(), m.value_fn.clone());
        let mut opt = PpoOptimizer::new(&policy, &value_fn);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let stats = ppo_update(&mut policy, &mut value_fn, &buf, 0.0, &h, &mut opt, &mut rng).unwrap();
        assert_eq!(stats.minibatches, 12);
        assert_eq!(policy, m.policy);
        assert_eq!(value_fn, m.value_fn);
    }

    #[test]
    fn update_is_deterministic_and_needs_full_buffer() {
        let m = model(1);
        let buf = filled_buffer(&m, 16);
        let h = PpoHyper {
            minibatch_size: 4,
            ..PpoHyper::default()
        };
        let run = || {
            let (mut p, mut v) = (m.policy.clone(), m.value_fn.clone());
            let mut opt = PpoOptimizer::new(&p, &v);
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            ppo_update(&mut p, &mut v, &buf, 0.3, &h, &mut opt, &mut rng).unwrap();
            (p, v)
        };
        let (a, b) = (run(), run());
        assert_eq!(a, b);
        assert_ne!(a.0, m.policy);

        let mut partial = RolloutBuffer::new(17);
        for t in buf.transitions() {
            partial.push(t.clone()).unwrap();
        }
        let (mut p, mut v) = (m.policy.clone(), m.value_fn.clone());
        let mut opt = PpoOptimizer::new(&p, &v);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert!(matches!(
            ppo_update(&mut p, &mut v, &partial, 0.0, &h, &mut opt, &mut rng),
            Err(Error::BufferNotFull { .. })
        ));
    }

    #[test]
    fn empty_minibatch_is_an_error() {
        let m = model(0);
        let b = Minibatch {
            observations: Array2::zeros((0, 3)),
            pre_squash: Array2::zeros((0, 2)),
            log_prob_old: vec![],
            advantages: vec![],
            returns: vec![],
        };
        assert!(ppo_loss(&m.policy, &m.value_fn, &b, &PpoHyper::default()).is_err());
    }
}
