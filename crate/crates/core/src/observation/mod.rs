//! Policy inputs: either a VAE latent of the ego raster or a small vector
//! of handcrafted lane features, followed by the vehicle's acceleration,
//! steering angle and speed.

mod raster;
mod vae;

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use raster::{
    rasterize, RasterConfig, RasterFrame, CENTERLINE_INTENSITY, LANE_INTENSITY, TRAFFIC_INTENSITY,
};
pub use vae::{
    kl_divergence, reparameterize, vae_loss, vae_train, EpochLoss, LatentSample, Vae, VaeConfig, VaeGrads,
    VaeLoss, VaeTrainReport,
};

use crate::error::{Error, Result};
use crate::rewards::RewardParams;
use crate::sim::Env;

/// Number of trailing vehicle-state entries in every observation.
pub const EXTERNALS: usize = 3;
/// Length of the handcrafted feature block in bypass mode.
pub const BYPASS_FEATURES: usize = 6;
/// Gap to the lead vehicle is normalized by this many metres.
pub const GAP_SCALE: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservationMode {
    Vae,
    Bypass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatentMode {
    /// `z = z_mu`.
    Deterministic,
    /// `z = z_mu + sigma * noise`.
    Sampled,
}

/// `[accel / a_max, steering / delta_max, speed / v_max]`, each clamped to `[-1, 1]`.
pub fn externals(env: &Env, params: &RewardParams) -> [f64; EXTERNALS] {
    let a = env.agent();
    let cfg = env.config();
    [
        (a.acceleration / cfg.max_accel).clamp(-1.0, 1.0),
        (a.steering / cfg.max_steer).clamp(-1.0, 1.0),
        (a.speed_kmh / params.v_max).clamp(-1.0, 1.0),
    ]
}

/// `[signed d / d_max, sin alpha, cos alpha, v / v_max, gap / 50 m, closing speed / v_max]`.
pub fn bypass_features(env: &Env, params: &RewardParams) -> [f64; BYPASS_FEATURES] {
    let agent = env.agent();
    let alpha = env.heading_error();
    let (gap, closing) = match env.traffic_ahead() {
        Some((gap, lead_speed)) => (gap / GAP_SCALE, (agent.speed_kmh - lead_speed) / params.v_max),
        None => (1.0, 0.0),
    };
    [
        (env.projection().signed_offset / params.d_max).clamp(-1.0, 1.0),
        alpha.sin(),
        alpha.cos(),
        (agent.speed_kmh / params.v_max).clamp(-1.0, 1.0),
        gap.clamp(0.0, 1.0),
        closing.clamp(-1.0, 1.0),
    ]
}

/// Assembles observation vectors for one run.
#[derive(Debug, Clone)]
pub struct ObservationBuilder {
    mode: ObservationMode,
    latent: LatentMode,
    raster: RasterConfig,
    vae: Option<Arc<Vae>>,
    params: RewardParams,
}

impl ObservationBuilder {
    pub fn bypass(params: RewardParams) -> Self {
        ObservationBuilder {
            mode: ObservationMode::Bypass,
            latent: LatentMode::Deterministic,
            raster: RasterConfig::default(),
            vae: None,
            params,
        }
    }

    pub fn with_vae(vae: Arc<Vae>, raster: RasterConfig, latent: LatentMode, params: RewardParams) -> Result<Self> {
        if vae.input_dim() != raster.pixels() {
            return Err(Error::ShapeMismatch {
                context: "vae input vs raster size",
                expected: raster.pixels(),
                got: vae.input_dim(),
            });
        }
        Ok(ObservationBuilder {
            mode: ObservationMode::Vae,
            latent,
            raster,
            vae: Some(vae),
            params,
        })
    }

    pub fn mode(&self) -> ObservationMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        match (&self.mode, &self.vae) {
            (ObservationMode::Vae, Some(vae)) => vae.z_dim() + EXTERNALS,
            _ => BYPASS_FEATURES + EXTERNALS,
        }
    }

    pub fn build(&self, env: &Env, rng: &mut impl Rng) -> Result<Vec<f64>> {
        let mut obs = Vec::with_capacity(self.dim());
        match (&self.mode, &self.vae) {
            (ObservationMode::Vae, Some(vae)) => {
                let frame = rasterize(env, &self.raster);
                match self.latent {
                    LatentMode::Deterministic => obs.extend(vae.encode(&frame.values)?.0),
                    LatentMode::Sampled => obs.extend(vae.sample_latent(&frame.values, rng)?.z),
                }
            }
            _ => obs.extend(bypass_features(env, &self.params)),
        }
        obs.extend(externals(env, &self.params));
        Ok(obs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::EnvConfig;
    use crate::track::{Track, TrackSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn env() -> Env {
        Env::new(EnvConfig::default(), Track::build(&TrackSpec::default()).unwrap()).unwrap()
    }

    #[test]
    fn bypass_at_rest() {
        let b = ObservationBuilder::bypass(RewardParams::default());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let obs = b.build(&env(), &mut rng).unwrap();
        assert_eq!(obs, vec![0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(b.dim(), 9);
    }

    #[test]
    fn vae_mode_dimensions_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let raster = RasterConfig::default();
        let vae = Arc::new(Vae::new(raster.pixels(), &VaeConfig::default(), &mut rng).unwrap());
        let b = ObservationBuilder::with_vae(vae, raster, LatentMode::Deterministic, RewardParams::default())
            .unwrap();
        let e = env();
        let o1 = b.build(&e, &mut rng).unwrap();
        let o2 = b.build(&e, &mut rng).unwrap();
        assert_eq!(o1.len(), 64 + 3);
        assert_eq!(o1, o2);
    }

    #[test]
    fn vae_raster_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = VaeConfig {
            z_dim: 4,
            encoder_hidden: vec![8],
            decoder_hidden: vec![8],
            ..VaeConfig::default()
        };
        let vae = Arc::new(Vae::new(100, &cfg, &mut rng).unwrap());
        assert!(ObservationBuilder::with_vae(
            vae,
            RasterConfig::default(),
            LatentMode::Deterministic,
            RewardParams::default()
        )
        .is_err());
    }
}
