//! Fully-connected variational autoencoder over flattened raster frames.

use ndarray::{s, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{AdamState, Mlp};

/// Probabilities are kept this far from 0 and 1 so the BCE stays finite.
const PROB_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VaeConfig {
    pub z_dim: usize,
    pub encoder_hidden: Vec<usize>,
    pub decoder_hidden: Vec<usize>,
    pub kl_beta: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub validation_fraction: f64,
}

impl Default for VaeConfig {
    fn default() -> Self {
        VaeConfig {
            z_dim: 64,
            encoder_hidden: vec![256, 128],
            decoder_hidden: vec![128, 256],
            kl_beta: 1.0,
            learning_rate: 1e-4,
            batch_size: 100,
            validation_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vae {
    /// `input -> ... -> 2 * z_dim` (means first, then log-variances).
    pub encoder: Mlp,
    /// `z_dim -> ... -> input` logits; a sigmoid maps them to probabilities.
    pub decoder: Mlp,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct VaeLoss {
    pub total: f64,
    pub bce: f64,
    pub kl: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatentSample {
    pub z_mu: Vec<f64>,
    pub z_log_var: Vec<f64>,
    pub z: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    (1.0 / (1.0 + (-x).exp())).clamp(PROB_FLOOR, 1.0 - PROB_FLOOR)
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `z = mu + exp(0.5 log_var) * noise`.
pub fn reparameterize(z_mu: &[f64], z_log_var: &[f64], noise: &[f64]) -> Result<Vec<f64>> {
    if z_log_var.len() != z_mu.len() || noise.len() != z_mu.len() {
        return Err(Error::ShapeMismatch {
            context: "reparameterize",
            expected: z_mu.len(),
            got: if z_log_var.len() != z_mu.len() { z_log_var.len() } else { noise.len() },
        });
    }
    Ok(z_mu
        .iter()
        .zip(z_log_var)
        .zip(noise)
        .map(|((m, lv), n)| m + (0.5 * lv).exp() * n)
        .collect())
}

/// Reconstruction BCE (summed over pixels) plus `kl_beta` times the KL
/// divergence of `N(mu, exp(log_var))` from the standard normal.
pub fn vae_loss(frame: &[f64], recon: &[f64], z_mu: &[f64], z_log_var: &[f64], kl_beta: f64) -> Result<VaeLoss> {
    if frame.len() != recon.len() {
        return Err(Error::ShapeMismatch {
            context: "vae_loss reconstruction",
            expected: frame.len(),
            got: recon.len(),
        });
    }
    if z_mu.len() != z_log_var.len() {
        return Err(Error::ShapeMismatch {
            context: "vae_loss latent",
            expected: z_mu.len(),
            got: z_log_var.len(),
        });
    }
    let mut bce = 0.0;
    for (&x, &p) in frame.iter().zip(recon) {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::OutOfDomain {
                what: "reconstruction probability",
                value: p,
            });
        }
        bce -= x * p.ln() + (1.0 - x) * (1.0 - p).ln();
    }
    let kl = kl_divergence(z_mu, z_log_var);
    Ok(VaeLoss {
        total: bce + kl_beta * kl,
        bce,
        kl,
    })
}

pub fn kl_divergence(z_mu: &[f64], z_log_var: &[f64]) -> f64 {
    -0.5 * z_mu
        .iter()
        .zip(z_log_var)
        .map(|(m, lv)| 1.0 + lv - m * m - lv.exp())
        .sum::<f64>()
}

/// Gradients of the batch-mean loss with respect to the encoder and decoder
/// parameter vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct VaeGrads {
    pub encoder: Vec<f64>,
    pub decoder: Vec<f64>,
}

impl Vae {
    pub fn new(input_dim: usize, config: &VaeConfig, rng: &mut impl Rng) -> Result<Self> {
        let mut enc = vec![input_dim];
        enc.extend(&config.encoder_hidden);
        enc.push(2 * config.z_dim);
        let mut dec = vec![config.z_dim];
        dec.extend(&config.decoder_hidden);
        dec.push(input_dim);
        Vae::from_nets(Mlp::new(&enc, 1.0, rng)?, Mlp::new(&dec, 1.0, rng)?)
    }

    pub fn from_nets(encoder: Mlp, decoder: Mlp) -> Result<Self> {
        let enc_out = encoder.output_dim();
        if !enc_out.is_multiple_of(2) || enc_out / 2 != decoder.input_dim() || decoder.output_dim() != encoder.input_dim() {
            return Err(Error::ShapeMismatch {
                context: "vae encoder/decoder",
                expected: 2 * decoder.input_dim(),
                got: enc_out,
            });
        }
        Ok(Vae { encoder, decoder })
    }

    pub fn z_dim(&self) -> usize {
        self.decoder.input_dim()
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.input_dim()
    }

    pub fn encode(&self, frame: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let out = self.encoder.predict_one(frame)?;
        let z = self.z_dim();
        Ok((out[..z].to_vec(), out[z..].to_vec()))
    }

    pub fn decode(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(self.decoder.predict_one(z)?.into_iter().map(sigmoid).collect())
    }

    pub fn sample_latent(&self, frame: &[f64], rng: &mut impl Rng) -> Result<LatentSample> {
        let (z_mu, z_log_var) = self.encode(frame)?;
        let noise: Vec<f64> = (0..z_mu.len()).map(|_| StandardNormal.sample(rng)).collect();
        let z = reparameterize(&z_mu, &z_log_var, &noise)?;
        Ok(LatentSample { z_mu, z_log_var, z })
    }

    /// Batch-mean loss for frames (`rows`) and per-sample standard-normal
    /// noise, with gradients through the reparameterized sample.
    pub fn loss_and_grads(
        &self,
        frames: ArrayView2<f64>,
        noise: ArrayView2<f64>,
        kl_beta: f64,
    ) -> Result<(VaeLoss, VaeGrads)> {
        let n = frames.nrows();
        if n == 0 {
            return Err(Error::Empty("vae batch"));
        }
        let zd = self.z_dim();
        if noise.dim() != (n, zd) {
            return Err(Error::ShapeMismatch {
                context: "vae noise",
                expected: n * zd,
                got: noise.len(),
            });
        }
        let inv_n = 1.0 / n as f64;
        let enc_cache = self.encoder.forward(frames)?;
        let enc_out = enc_cache.output();
        let mu = enc_out.slice(s![.., ..zd]);
        let log_var = enc_out.slice(s![.., zd..]);
        let std = log_var.mapv(|lv| (0.5 * lv).exp());
        let z = &mu + &(&std * &noise);

        let dec_cache = self.decoder.forward(z.view())?;
        let logits = dec_cache.output();
        let mut bce = 0.0;
        let mut d_logits = Array2::zeros(logits.dim());
        for ((l, x), g) in logits.iter().zip(frames.iter()).zip(d_logits.iter_mut()) {
            bce += softplus(*l) - x * l;
            *g = (sigmoid(*l) - x) * inv_n;
        }
        let (dec_grads, d_z) = self.decoder.backward(&dec_cache, d_logits.view())?;

        let mut kl = 0.0;
        let mut d_enc = Array2::zeros(enc_out.dim());
        for r in 0..n {
            for j in 0..zd {
                let (m, lv) = (mu[[r, j]], log_var[[r, j]]);
                let e = lv.exp();
                kl += -0.5 * (1.0 + lv - m * m - e);
                d_enc[[r, j]] = d_z[[r, j]] + kl_beta * m * inv_n;
                d_enc[[r, zd + j]] =
                    d_z[[r, j]] * noise[[r, j]] * 0.5 * std[[r, j]] + kl_beta * 0.5 * (e - 1.0) * inv_n;
            }
        }
        let (enc_grads, _) = self.encoder.backward(&enc_cache, d_enc.view())?;
        let (bce, kl) = (bce * inv_n, kl * inv_n);
        Ok((
            VaeLoss {
                total: bce + kl_beta * kl,
                bce,
                kl,
            },
            VaeGrads {
                encoder: enc_grads,
                decoder: dec_grads,
            },
        ))
    }

    /// Batch-mean loss using `z = mu` (no sampling noise).
    pub fn evaluate(&self, frames: ArrayView2<f64>, kl_beta: f64) -> Result<VaeLoss> {
        let n = frames.nrows();
        if n == 0 {
            return Err(Error::Empty("vae evaluation set"));
        }
        let zd = self.z_dim();
        let enc = self.encoder.predict(frames)?;
        let mu = enc.slice(s![.., ..zd]).to_owned();
        let logits = self.decoder.predict(mu.view())?;
        let bce: f64 = logits
            .iter()
            .zip(frames.iter())
            .map(|(l, x)| softplus(*l) - x * l)
            .sum();
        let kl: f64 = enc
            .rows()
            .into_iter()
            .map(|row| {
                let row = row.to_vec();
                kl_divergence(&row[..zd], &row[zd..])
            })
            .sum();
        let (bce, kl) = (bce / n as f64, kl / n as f64);
        Ok(VaeLoss {
            total: bce + kl_beta * kl,
            bce,
            kl,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_bce: f64,
    pub train_kl: f64,
    pub val_bce: f64,
    pub val_kl: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VaeTrainReport {
    /// Validation loss before the first update.
    pub initial: VaeLoss,
    pub history: Vec<EpochLoss>,
}

/// Minibatch Adam on the negative ELBO. The dataset is shuffled once and
/// split into training and validation parts; training batches are
/// reshuffled every epoch.
pub fn vae_train(
    vae: &mut Vae,
    frames: &Array2<f64>,
    epochs: usize,
    config: &VaeConfig,
    rng: &mut impl Rng,
) -> Result<VaeTrainReport> {
    let n = frames.nrows();
    if n == 0 {
        return Err(Error::Empty("vae dataset"));
    }
    if frames.ncols() != vae.input_dim() {
        return Err(Error::ShapeMismatch {
            context: "vae dataset frames",
            expected: vae.input_dim(),
            got: frames.ncols(),
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let n_val = if n > 1 {
        ((n as f64 * config.validation_fraction).round() as usize).clamp(1, n - 1)
    } else {
        0
    };
    let (val_idx, train_idx) = order.split_at(n_val);
    let val = frames.select(Axis(0), if val_idx.is_empty() { train_idx } else { val_idx });
    let mut train_idx = train_idx.to_vec();

    let mut enc_opt = AdamState::new(vae.encoder.params().len());
    let mut dec_opt = AdamState::new(vae.decoder.params().len());
    let initial = vae.evaluate(val.view(), config.kl_beta)?;
    let mut history = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        train_idx.shuffle(rng);
        let (mut bce, mut kl, mut seen) = (0.0, 0.0, 0usize);
        for chunk in train_idx.chunks(config.batch_size.max(1)) {
            let batch = frames.select(Axis(0), chunk);
            let noise = Array2::from_shape_simple_fn((chunk.len(), vae.z_dim()), || StandardNormal.sample(rng));
            let (loss, grads) = vae.loss_and_grads(batch.view(), noise.view(), config.kl_beta)?;
            enc_opt.step(vae.encoder.params_mut(), &grads.encoder, config.learning_rate)?;
            dec_opt.step(vae.decoder.params_mut(), &grads.decoder, config.learning_rate)?;
            bce += loss.bce * chunk.len() as f64;
            kl += loss.kl * chunk.len() as f64;
            seen += chunk.len();
        }
        let v = vae.evaluate(val.view(), config.kl_beta)?;
        history.push(EpochLoss {
            epoch,
            train_bce: bce / seen as f64,
            train_kl: kl / seen as f64,
            val_bce: v.bce,
            val_kl: v.kl,
        });
    }
    Ok(VaeTrainReport { initial, history })
}
