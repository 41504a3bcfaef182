use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Action, Env};
use crate::geom::{wrap_angle, Vec2};

/// Pure-pursuit lane follower with a proportional speed loop.
///
/// Used to collect raster frames for VAE training and as a reference
/// driver in the browser demo. Each call to [`ScriptedDriver::new_episode`]
/// draws a fresh target speed and lateral bias so that collected frames
/// cover off-center and misaligned views.
#[derive(Debug, Clone)]
pub struct ScriptedDriver {
    pub target_speed_kmh: f64,
    pub lateral_bias: f64,
    pub lookahead: f64,
    pub speed_gain: f64,
    pub noise_std: f64,
    rng: ChaCha8Rng,
}

impl ScriptedDriver {
    pub fn new(seed: u64) -> Self {
        ScriptedDriver {
            target_speed_kmh: 30.0,
            lateral_bias: 0.0,
            lookahead: 8.0,
            speed_gain: 0.3,
            noise_std: 0.1,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn new_episode(&mut self) {
        self.target_speed_kmh = self.rng.random_range(15.0..60.0);
        self.lateral_bias = self.rng.random_range(-1.5..1.5);
    }

    pub fn act(&mut self, env: &Env) -> Action {
        let agent = env.agent();
        let cfg = env.config();
        let (target, heading) = env
            .track()
            .point_at(env.projection().nearest_s + self.lookahead);
        let target = target + Vec2::from_heading(heading).perp() * self.lateral_bias;
        let rel = target - agent.position;
        let bearing = wrap_angle(rel.y.atan2(rel.x) - agent.heading);
        let ld = rel.norm().max(1e-6);
        let steer_angle = (2.0 * cfg.wheelbase * bearing.sin() / ld).atan();
        let noise = Normal::new(0.0, self.noise_std.max(1e-12)).expect("finite std");
        let steer = steer_angle / cfg.max_steer + noise.sample(&mut self.rng);
        let throttle =
            self.speed_gain * (self.target_speed_kmh - agent.speed_kmh) / 10.0 + noise.sample(&mut self.rng);
        Action::new(throttle.clamp(-1.0, 1.0), steer.clamp(-1.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{EnvConfig, TerminationReason};
    use crate::track::{Track, TrackSpec};

    #[test]
    fn scripted_driver_completes_laps() {
        let track = Track::build(&TrackSpec::default()).unwrap();
        let mut env = Env::new(EnvConfig::default(), track).unwrap();
        let mut driver = ScriptedDriver::new(3);
        driver.target_speed_kmh = 40.0;
        let mut max_d: f64 = 0.0;
        let reason = loop {
            let out = env.step(driver.act(&env)).unwrap();
            max_d = max_d.max(out.reward_inputs.d);
            if out.terminated {
                break out.termination_reason;
            }
        };
        assert_eq!(reason, TerminationReason::LapsDone);
        assert!(max_d < 1.0, "{max_d}");
    }
}
