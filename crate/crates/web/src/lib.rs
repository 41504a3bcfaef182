//! Browser bindings for the demo page in `www/`.
//!
//! Three operations are exposed: sampling the two speed-reward curves,
//! stepping a scripted driver around the track with traffic, and rendering
//! the agent's ego-centric raster. Arrays cross the boundary as flat
//! `Float64Array`s.

use wasm_bindgen::prelude::*;

use lanerl::curriculum::{AgentKind, AgentVariant};
use lanerl::observation::{rasterize, RasterConfig};
use lanerl::rewards::{speed_reward_original, speed_reward_revised, RewardParams};
use lanerl::sim::{Env, EnvConfig, ScriptedDriver, TerminationReason};
use lanerl::track::{Track, TrackSpec};

fn js_err(e: lanerl::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Interleaved `[v, r_v(v), r_v'(v), ...]` for `v` from 0 to `v_end` km/h.
#[wasm_bindgen]
pub fn reward_curves(v_end: f64, step: f64) -> Result<Vec<f64>, JsError> {
    if !(step > 0.0 && v_end >= 0.0) {
        return Err(JsError::new("step must be positive and v_end non-negative"));
    }
    let p = RewardParams::default();
    let n = (v_end / step).floor() as usize;
    let mut out = Vec::with_capacity(3 * (n + 1));
    for k in 0..=n {
        let v = k as f64 * step;
        out.push(v);
        out.push(speed_reward_original(v, &p).map_err(js_err)?);
        out.push(speed_reward_revised(v, &p).map_err(js_err)?);
    }
    Ok(out)
}

/// CuRLA traffic count per episode for a schedule of `total` episodes.
#[wasm_bindgen]
pub fn traffic_schedule(total: usize, switch: usize, ramp: usize, traffic_max: usize) -> Result<Vec<u32>, JsError> {
    let v = AgentVariant {
        kind: AgentKind::Curla,
        switch_episode: switch,
        total_episodes: total,
        traffic_max,
        traffic_ramp_episodes: ramp,
    };
    v.validate().map_err(js_err)?;
    (0..total)
        .map(|e| v.traffic_count_for_episode(e).map(|t| t as u32).map_err(js_err))
        .collect()
}

#[wasm_bindgen]
pub struct Demo {
    env: Env,
    driver: ScriptedDriver,
    raster: RasterConfig,
    trail: Vec<f64>,
    reason: TerminationReason,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u64, traffic: usize, target_speed_kmh: f64) -> Result<Demo, JsError> {
        let track = Track::build(&TrackSpec::default()).map_err(js_err)?;
        let config = EnvConfig {
            rng_seed: seed,
            ..EnvConfig::default()
        };
        let mut env = Env::new(config, track).map_err(js_err)?;
        env.reset(0, traffic).map_err(js_err)?;
        let mut driver = ScriptedDriver::new(seed);
        driver.target_speed_kmh = target_speed_kmh;
        let p = env.agent().position;
        Ok(Demo {
            env,
            driver,
            raster: RasterConfig::default(),
            trail: vec![p.x, p.y],
            reason: TerminationReason::None,
        })
    }

    /// Advances up to `n` steps. Returns false once the episode has ended.
    pub fn step(&mut self, n: usize) -> Result<bool, JsError> {
        for _ in 0..n {
            if self.env.is_terminated() {
                return Ok(false);
            }
            let action = self.driver.act(&self.env);
            let out = self.env.step(action).map_err(js_err)?;
            self.reason = out.termination_reason;
            let p = self.env.agent().position;
            self.trail.extend([p.x, p.y]);
        }
        Ok(!self.env.is_terminated())
    }

    pub fn set_target_speed(&mut self, kmh: f64) {
        self.driver.target_speed_kmh = kmh.clamp(0.0, 120.0);
    }

    pub fn set_lateral_bias(&mut self, metres: f64) {
        self.driver.lateral_bias = metres;
    }

    /// Closed centerline as `[x0, y0, x1, y1, ...]`.
    pub fn centerline(&self) -> Vec<f64> {
        self.env
            .track()
            .waypoints()
            .iter()
            .flat_map(|w| [w.position.x, w.position.y])
            .collect()
    }

    pub fn lane_half_width(&self) -> f64 {
        self.env.track().lane_half_width()
    }

    /// Agent positions since reset as `[x, y, ...]`.
    pub fn trail(&self) -> Vec<f64> {
        self.trail.clone()
    }

    /// `[x, y, heading, half_length, half_width]` per vehicle, agent first.
    pub fn vehicles(&self) -> Vec<f64> {
        let a = self.env.agent();
        let mut out = vec![a.position.x, a.position.y, a.heading, a.half_length, a.half_width];
        for t in self.env.traffic() {
            let b = t.footprint(self.env.track());
            out.extend([b.center.x, b.center.y, b.heading, b.half_length, b.half_width]);
        }
        out
    }

    /// `[speed km/h, lateral offset m, heading error rad, laps, seconds]`.
    pub fn status(&self) -> Vec<f64> {
        let a = self.env.agent();
        let laps = self.env.track().lap_progress(a.cumulative_distance).unwrap_or(0.0);
        vec![
            a.speed_kmh,
            self.env.projection().lateral_offset_d,
            self.env.heading_error(),
            laps,
            self.env.episode_time(),
        ]
    }

    pub fn termination(&self) -> String {
        self.reason.as_str().to_string()
    }

    pub fn raster_width(&self) -> usize {
        self.raster.width
    }

    pub fn raster_height(&self) -> usize {
        self.raster.height
    }

    /// Row-major raster intensities in `[0, 1]`, row 0 ahead of the agent.
    pub fn raster(&self) -> Vec<f64> {
        rasterize(&self.env, &self.raster).values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curves_hit_anchor_points() {
        let c = reward_curves(120.0, 0.5).unwrap();
        assert_eq!(c.len(), 3 * 241);
        let at = |v: f64| {
            let k = (v / 0.5) as usize;
            (c[3 * k + 1], c[3 * k + 2])
        };
        assert_eq!(at(15.0), (1.0, 0.5));
        assert_eq!(at(60.0), (1.0, 1.0));
        assert_eq!(at(105.0), (0.0, 0.0));
    }

    #[test]
    fn schedule_ramps() {
        let s = traffic_schedule(400, 150, 100, 4).unwrap();
        assert!(s[..150].iter().all(|&t| t == 0));
        assert_eq!(s[399], 4);
        assert!(s.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn demo_drives_and_renders() {
        let mut d = Demo::new(3, 2, 30.0).unwrap();
        assert_eq!(d.vehicles().len(), 15);
        d.step(400).unwrap();
        assert_eq!(d.trail().len(), 2 * 401);
        let s = d.status();
        assert!(s[0] > 20.0 && s[1] < 3.0, "{s:?}");
        let r = d.raster();
        assert_eq!(r.len(), d.raster_width() * d.raster_height());
        assert!(r.iter().any(|&x| x > 0.0));
        assert!(d.centerline().len() > 100);
    }
}
