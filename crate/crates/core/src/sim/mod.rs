//! Fixed-timestep lane-following environment with constant-speed traffic.
//!
//! Speeds crossing this module's public surface are in km/h; kinematics run
//! in m/s internally. The environment emits reward *inputs* only; scoring is
//! left to the caller.

mod driver;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{OrientedBox, Vec2};
use crate::track::{heading_error, Track, TrackProjection};

pub use driver::ScriptedDriver;

pub const KMH_PER_MS: f64 = 3.6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    /// Seconds per step.
    pub dt: f64,
    /// Radians.
    pub max_steer: f64,
    /// m/s².
    pub max_accel: f64,
    pub wheelbase: f64,
    pub agent_half_length: f64,
    pub agent_half_width: f64,
    pub traffic_count: usize,
    /// km/h.
    pub traffic_speed_min: f64,
    /// km/h.
    pub traffic_speed_max: f64,
    pub traffic_half_length: f64,
    pub traffic_half_width: f64,
    /// Minimum arc distance between any two vehicles at reset (m).
    pub min_separation: f64,
    /// km/h.
    pub low_speed_threshold: f64,
    /// Seconds.
    pub low_speed_timeout: f64,
    /// Metres.
    pub off_center_limit: f64,
    pub laps_to_finish: u32,
    pub rng_seed: u64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            dt: 0.05,
            max_steer: 0.5,
            max_accel: 3.0,
            wheelbase: 2.5,
            agent_half_length: 2.2,
            agent_half_width: 0.9,
            traffic_count: 0,
            traffic_speed_min: 10.0,
            traffic_speed_max: 25.0,
            traffic_half_length: 2.2,
            traffic_half_width: 0.9,
            min_separation: 10.0,
            low_speed_threshold: 1.0,
            low_speed_timeout: 5.0,
            off_center_limit: 3.0,
            laps_to_finish: 3,
            rng_seed: 0,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.dt > 0.0 && self.dt <= 0.1) {
            return bad("dt must lie in (0, 0.1]");
        }
        if !(self.max_steer > 0.0 && self.max_steer < std::f64::consts::FRAC_PI_2) {
            return bad("max_steer must lie in (0, pi/2)");
        }
        if !(self.max_accel > 0.0 && self.wheelbase > 0.0) {
            return bad("max_accel and wheelbase must be positive");
        }
        if !(self.traffic_speed_min >= 0.0 && self.traffic_speed_min <= self.traffic_speed_max) {
            return bad("traffic speed range is empty");
        }
        if !(self.off_center_limit > 0.0 && self.low_speed_timeout > 0.0) {
            return bad("termination limits must be positive");
        }
        if self.laps_to_finish == 0 {
            return bad("laps_to_finish must be >= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Action {
    pub throttle: f64,
    pub steer: f64,
}

impl Action {
    pub fn new(throttle: f64, steer: f64) -> Self {
        Action { throttle, steer }
    }

    fn clamped(self) -> Action {
        let c = |x: f64| if x.is_finite() { x.clamp(-1.0, 1.0) } else { 0.0 };
        Action {
            throttle: c(self.throttle),
            steer: c(self.steer),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub position: Vec2,
    pub heading: f64,
    /// km/h, never negative.
    pub speed_kmh: f64,
    /// Radians, within `[-max_steer, max_steer]`.
    pub steering: f64,
    /// m/s², within `[-max_accel, max_accel]`.
    pub acceleration: f64,
    /// Metres travelled since reset.
    pub cumulative_distance: f64,
    pub half_length: f64,
    pub half_width: f64,
}

impl VehicleState {
    pub fn footprint(&self) -> OrientedBox {
        OrientedBox {
            center: self.position,
            heading: self.heading,
            half_length: self.half_length,
            half_width: self.half_width,
        }
    }
}

/// Kinematic bicycle update. Speed saturates at zero (no reverse).
pub fn bicycle_step(state: &VehicleState, action: Action, dt: f64, config: &EnvConfig) -> VehicleState {
    let action = action.clamped();
    let accel = action.throttle * config.max_accel;
    let steering = action.steer * config.max_steer;
    let v = (state.speed_kmh / KMH_PER_MS + accel * dt).max(0.0);
    let dheading = v / config.wheelbase * steering.tan() * dt;
    // midpoint heading keeps constant-steer arcs on the true circle to second order
    let dir = Vec2::from_heading(state.heading + 0.5 * dheading);
    VehicleState {
        position: state.position + dir * (v * dt),
        heading: crate::geom::wrap_angle(state.heading + dheading),
        speed_kmh: v * KMH_PER_MS,
        steering,
        acceleration: accel,
        cumulative_distance: state.cumulative_distance + v * dt,
        ..*state
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficVehicle {
    /// Arc length along the centerline.
    pub track_s: f64,
    /// km/h.
    pub speed_kmh: f64,
    pub half_length: f64,
    pub half_width: f64,
}

impl TrafficVehicle {
    pub fn footprint(&self, track: &Track) -> OrientedBox {
        let (center, heading) = track.point_at(self.track_s);
        OrientedBox {
            center,
            heading,
            half_length: self.half_length,
            half_width: self.half_width,
        }
    }
}

/// Places `count` traffic vehicles at least `config.min_separation` apart
/// from each other and from the agent at `s = 0`.
///
/// The free slack of the loop is split into `count + 1` random gaps, which
/// always succeeds when the layout is feasible at all.
pub fn place_traffic(
    track: &Track,
    config: &EnvConfig,
    count: usize,
    rng: &mut impl Rng,
) -> Result<Vec<TrafficVehicle>> {
    let length = track.total_length();
    let needed = (count + 1) as f64 * config.min_separation;
    if count > 0 && needed > length {
        return Err(Error::TrafficInfeasible {
            count,
            min_gap: config.min_separation,
            length,
        });
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let slack = length - needed;
    let mut cuts: Vec<f64> = (0..count).map(|_| rng.random::<f64>() * slack).collect();
    cuts.sort_by(f64::total_cmp);
    let speeds: Vec<f64> = (0..count)
        .map(|_| {
            let span = config.traffic_speed_max - config.traffic_speed_min;
            config.traffic_speed_min + rng.random::<f64>() * span
        })
        .collect();
    Ok(cuts
        .iter()
        .zip(speeds)
        .enumerate()
        .map(|(i, (&cut, speed))| TrafficVehicle {
            track_s: cut + (i + 1) as f64 * config.min_separation,
            speed_kmh: speed,
            half_length: config.traffic_half_length,
            half_width: config.traffic_half_width,
        })
        .collect())
}

/// Single-impulse contact detector: a contact event yields its closing speed
/// (km/h) on the first overlapping step and zero while the overlap persists.
#[derive(Debug, Clone, Default)]
pub struct ContactTracker {
    in_contact: Vec<bool>,
}

impl ContactTracker {
    pub fn reset(&mut self, traffic_len: usize) {
        self.in_contact.clear();
        self.in_contact.resize(traffic_len, false);
    }

    pub fn detect(&mut self, agent: &VehicleState, traffic: &[TrafficVehicle], track: &Track) -> f64 {
        if self.in_contact.len() != traffic.len() {
            self.reset(traffic.len());
        }
        let agent_box = agent.footprint();
        let mut intensity = 0.0;
        for (vehicle, was) in traffic.iter().zip(self.in_contact.iter_mut()) {
            let now = agent_box.overlaps(&vehicle.footprint(track));
            if now && !*was {
                intensity += (agent.speed_kmh - vehicle.speed_kmh).abs();
            }
            *was = now;
        }
        intensity
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    None,
    LapsDone,
    OffCenter,
    Stalled,
    /// Step cap reached. Set by training harnesses, never by [`Env`].
    Truncated,
}

impl TerminationReason {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminationReason::None => "none",
            TerminationReason::LapsDone => "laps_done",
            TerminationReason::OffCenter => "off_center",
            TerminationReason::Stalled => "stalled",
            TerminationReason::Truncated => "truncated",
        }
    }
}

impl std::str::FromStr for TerminationReason {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "none" => TerminationReason::None,
            "laps_done" => TerminationReason::LapsDone,
            "off_center" => TerminationReason::OffCenter,
            "stalled" => TerminationReason::Stalled,
            "truncated" => TerminationReason::Truncated,
            other => return Err(Error::format("termination reason", other)),
        })
    }
}

/// Laps first, then lane departure, then the low-speed timer. Collisions
/// never end an episode on their own.
pub fn check_termination(
    lap_fraction: f64,
    lateral_offset: f64,
    low_speed_time: f64,
    config: &EnvConfig,
) -> TerminationReason {
    if lap_fraction >= config.laps_to_finish as f64 {
        TerminationReason::LapsDone
    } else if lateral_offset > config.off_center_limit {
        TerminationReason::OffCenter
    } else if low_speed_time >= config.low_speed_timeout - 1e-9 {
        TerminationReason::Stalled
    } else {
        TerminationReason::None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardInputs {
    /// Heading error, radians in `(-π, π]`.
    pub alpha: f64,
    /// Unsigned lateral offset, metres.
    pub d: f64,
    /// km/h.
    pub v: f64,
    pub collision_intensity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub lap_fraction: f64,
    pub cumulative_distance: f64,
    pub episode_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub reward_inputs: RewardInputs,
    pub terminated: bool,
    pub termination_reason: TerminationReason,
    pub info: StepInfo,
}

#[derive(Debug, Clone)]
pub struct Env {
    config: EnvConfig,
    track: Track,
    agent: VehicleState,
    traffic: Vec<TrafficVehicle>,
    contacts: ContactTracker,
    projection: TrackProjection,
    low_speed_steps: u64,
    steps: u64,
    terminated: bool,
}

impl Env {
    pub fn new(config: EnvConfig, track: Track) -> Result<Self> {
        config.validate()?;
        let mut env = Env {
            config,
            projection: track.project(Vec2::ZERO),
            track,
            agent: VehicleState {
                position: Vec2::ZERO,
                heading: 0.0,
                speed_kmh: 0.0,
                steering: 0.0,
                acceleration: 0.0,
                cumulative_distance: 0.0,
                half_length: config.agent_half_length,
                half_width: config.agent_half_width,
            },
            traffic: Vec::new(),
            contacts: ContactTracker::default(),
            low_speed_steps: 0,
            steps: 0,
            terminated: false,
        };
        env.reset(0, 0)?;
        Ok(env)
    }

    /// Resets to `s = 0` at rest with `traffic_count` vehicles. The layout is
    /// a function of `(config.rng_seed, episode_index)` only.
    pub fn reset(&mut self, episode_index: u64, traffic_count: usize) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.rng_seed);
        rng.set_stream(episode_index);
        self.traffic = place_traffic(&self.track, &self.config, traffic_count, &mut rng)?;
        let (position, heading) = self.track.point_at(0.0);
        self.agent = VehicleState {
            position,
            heading,
            speed_kmh: 0.0,
            steering: 0.0,
            acceleration: 0.0,
            cumulative_distance: 0.0,
            half_length: self.config.agent_half_length,
            half_width: self.config.agent_half_width,
        };
        self.contacts.reset(self.traffic.len());
        self.projection = self.track.project(position);
        self.low_speed_steps = 0;
        self.steps = 0;
        self.terminated = false;
        Ok(())
    }

    pub fn step(&mut self, action: Action) -> Result<StepOutcome> {
        if self.terminated {
            return Err(Error::EpisodeTerminated);
        }
        let dt = self.config.dt;
        self.agent = bicycle_step(&self.agent, action, dt, &self.config);
        let length = self.track.total_length();
        for vehicle in &mut self.traffic {
            vehicle.track_s = (vehicle.track_s + vehicle.speed_kmh / KMH_PER_MS * dt).rem_euclid(length);
        }
        self.steps += 1;
        self.projection = self.track.project(self.agent.position);
        let alpha = heading_error(&self.projection, self.agent.heading);
        let intensity = self.contacts.detect(&self.agent, &self.traffic, &self.track);

        if self.agent.speed_kmh < self.config.low_speed_threshold {
            self.low_speed_steps += 1;
        } else {
            self.low_speed_steps = 0;
        }
        let lap_fraction = self.track.lap_progress(self.agent.cumulative_distance)?;
        let reason = check_termination(
            lap_fraction,
            self.projection.lateral_offset_d,
            self.low_speed_steps as f64 * dt,
            &self.config,
        );
        self.terminated = reason != TerminationReason::None;
        Ok(StepOutcome {
            reward_inputs: RewardInputs {
                alpha,
                d: self.projection.lateral_offset_d,
                v: self.agent.speed_kmh,
                collision_intensity: intensity,
            },
            terminated: self.terminated,
            termination_reason: reason,
            info: StepInfo {
                lap_fraction,
                cumulative_distance: self.agent.cumulative_distance,
                episode_time: self.episode_time(),
            },
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn track(&self) -> &Track {
        &self.track
    }

    pub fn agent(&self) -> &VehicleState {
        &self.agent
    }

    pub fn traffic(&self) -> &[TrafficVehicle] {
        &self.traffic
    }

    pub fn projection(&self) -> &TrackProjection {
        &self.projection
    }

    pub fn heading_error(&self) -> f64 {
        heading_error(&self.projection, self.agent.heading)
    }

    pub fn episode_time(&self) -> f64 {
        self.steps as f64 * self.config.dt
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    /// Nearest traffic vehicle ahead along the track within half a lap:
    /// `(center-to-center arc gap in m, speed in km/h)`.
    pub fn traffic_ahead(&self) -> Option<(f64, f64)> {
        let half = self.track.total_length() / 2.0;
        self.traffic
            .iter()
            .map(|v| (self.track.forward_gap(self.projection.nearest_s, v.track_s), v.speed_kmh))
            .filter(|&(gap, _)| gap < half)
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }

    /// Overrides the agent state. Intended for tests and scripted scenarios.
    pub fn set_agent(&mut self, state: VehicleState) {
        self.agent = state;
        self.projection = self.track.project(state.position);
    }

    pub fn set_traffic(&mut self, traffic: Vec<TrafficVehicle>) {
        self.contacts.reset(traffic.len());
        self.traffic = traffic;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::track::{TrackShape, TrackSpec};

    fn oval_env(traffic: usize) -> Env {
        let track = Track::build(&TrackSpec::default()).unwrap();
        let mut env = Env::new(EnvConfig::default(), track).unwrap();
        env.reset(0, traffic).unwrap();
        env
    }

    fn at_rest() -> VehicleState {
        VehicleState {
            position: Vec2::ZERO,
            heading: 0.0,
            speed_kmh: 0.0,
            steering: 0.0,
            acceleration: 0.0,
            cumulative_distance: 0.0,
            half_length: 2.2,
            half_width: 0.9,
        }
    }

    #[test]
    fn bicycle_rest_stays_put() {
        let s = at_rest();
        let n = bicycle_step(&s, Action::new(0.0, 0.0), 0.05, &EnvConfig::default());
        assert_eq!(n, s);
    }

    #[test]
    fn bicycle_straight_advance() {
        let mut s = at_rest();
        s.speed_kmh = 36.0;
        let n = bicycle_step(&s, Action::new(0.0, 0.0), 0.05, &EnvConfig::default());
        assert!((n.position.x - 0.5).abs() < 1e-12);
        assert!(n.position.y.abs() < 1e-15);
        assert!((n.cumulative_distance - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bicycle_clamps_and_saturates() {
        let cfg = EnvConfig::default();
        let mut s = at_rest();
        // 0.5 km/h is below one full-brake step of 0.15 m/s
        s.speed_kmh = 0.5;
        let n = bicycle_step(&s, Action::new(-5.0, f64::NAN), 0.05, &cfg);
        assert_eq!(n.speed_kmh, 0.0);
        assert_eq!(n.acceleration, -cfg.max_accel);
        assert_eq!(n.steering, 0.0);
        let n = bicycle_step(&s, Action::new(0.0, 3.0), 0.05, &cfg);
        assert_eq!(n.steering, cfg.max_steer);
    }

    /// Fits a circle through three trajectory points and compares curvature
    /// with tan(delta) / wheelbase.
    #[test]
    fn constant_steer_curvature() {
        let cfg = EnvConfig::default();
        let mut s = at_rest();
        s.speed_kmh = 20.0;
        let mut pts = Vec::new();
        for _ in 0..400 {
            s = bicycle_step(&s, Action::new(0.0, 0.4), cfg.dt, &cfg);
            pts.push(s.position);
        }
        let (a, b, c) = (pts[50], pts[150], pts[250]);
        let area2 = (b - a).cross(c - a);
        let radius = a.distance(b) * b.distance(c) * c.distance(a) / (2.0 * area2.abs());
        let expected = (0.4 * cfg.max_steer).tan() / cfg.wheelbase;
        assert!((1.0 / radius - expected).abs() < 1e-3, "{} vs {}", 1.0 / radius, expected);
    }

    #[test]
    fn reset_without_traffic() {
        let env = oval_env(0);
        assert!(env.traffic().is_empty());
        assert_eq!(env.agent().speed_kmh, 0.0);
        assert!(env.projection().lateral_offset_d < 1e-12);
    }

    #[test]
    fn reset_is_deterministic_and_separated() {
        let a = oval_env(6);
        let b = oval_env(6);
        assert_eq!(a.traffic(), b.traffic());
        let l = a.track().total_length();
        let mut s: Vec<f64> = a.traffic().iter().map(|t| t.track_s).collect();
        s.push(0.0);
        s.sort_by(f64::total_cmp);
        for i in 0..s.len() {
            let gap = (s[(i + 1) % s.len()] - s[i]).rem_euclid(l);
            assert!(gap >= 10.0 - 1e-9, "{gap}");
        }
        let mut c = a.clone();
        c.reset(1, 6).unwrap();
        assert_ne!(a.traffic(), c.traffic());
    }

    #[test]
    fn infeasible_traffic() {
        let track = Track::build(&TrackSpec {
            shape: TrackShape::Circle { radius: 50.0 },
            spacing: 1.0,
            lane_half_width: 2.0,
        })
        .unwrap();
        let mut env = Env::new(EnvConfig::default(), track).unwrap();
        assert!(matches!(env.reset(0, 500), Err(Error::TrafficInfeasible { .. })));
        assert!(env.reset(0, 30).is_ok());
    }

    #[test]
    fn rear_end_intensity() {
        let track = Track::build(&TrackSpec::default()).unwrap();
        let mut agent = at_rest();
        agent.position = Vec2::new(5.0, 0.0);
        agent.speed_kmh = 25.0;
        let traffic = vec![TrafficVehicle {
            track_s: 9.0,
            speed_kmh: 15.0,
            half_length: 2.2,
            half_width: 0.9,
        }];
        let mut tracker = ContactTracker::default();
        assert!((tracker.detect(&agent, &traffic, &track) - 10.0).abs() < 1e-12);
        assert_eq!(tracker.detect(&agent, &traffic, &track), 0.0);
        agent.position = Vec2::new(-5.0, 0.0);
        assert_eq!(tracker.detect(&agent, &traffic, &track), 0.0);
    }

    #[test]
    fn termination_rules() {
        let cfg = EnvConfig::default();
        assert_eq!(check_termination(0.5, 3.1, 0.0, &cfg), TerminationReason::OffCenter);
        assert_eq!(check_termination(0.5, 0.2, 5.05, &cfg), TerminationReason::Stalled);
        assert_eq!(check_termination(0.5, 0.2, 4.9, &cfg), TerminationReason::None);
        assert_eq!(check_termination(3.0, 0.2, 0.0, &cfg), TerminationReason::LapsDone);
    }

    #[test]
    fn collision_does_not_terminate() {
        let mut env = oval_env(0);
        let mut agent = *env.agent();
        agent.speed_kmh = 20.0;
        agent.position = Vec2::new(1.0, 0.0);
        env.set_agent(agent);
        env.set_traffic(vec![TrafficVehicle {
            track_s: 4.0,
            speed_kmh: 0.0,
            half_length: 2.2,
            half_width: 0.9,
        }]);
        let out = env.step(Action::new(0.0, 0.0)).unwrap();
        assert!((out.reward_inputs.collision_intensity - 20.0).abs() < 1e-9);
        assert!(!out.terminated);
    }

    #[test]
    fn never_moving_agent_stalls() {
        let mut env = oval_env(0);
        let mut n = 0;
        loop {
            let out = env.step(Action::new(0.0, 0.0)).unwrap();
            n += 1;
            if out.terminated {
                assert_eq!(out.termination_reason, TerminationReason::Stalled);
                break;
            }
        }
        assert_eq!(n, (5.0f64 / 0.05).ceil() as usize);
        assert!(matches!(env.step(Action::default()), Err(Error::EpisodeTerminated)));
    }

    #[test]
    fn first_step_and_full_throttle() {
        let mut env = oval_env(0);
        let out = env.step(Action::new(0.0, 0.0)).unwrap();
        let r = out.reward_inputs;
        assert!(r.alpha.abs() < 1e-12 && r.d < 1e-12 && r.v == 0.0 && r.collision_intensity == 0.0);
        assert!(!out.terminated);
        let mut v = 0.0;
        for _ in 0..10 {
            let out = env.step(Action::new(1.0, 0.0)).unwrap();
            let dv = out.reward_inputs.v - v;
            assert!((dv - 3.0 * 0.05 * 3.6).abs() < 1e-9);
            v = out.reward_inputs.v;
        }
    }

    #[test]
    fn traffic_ahead_reports_nearest() {
        let mut env = oval_env(0);
        assert!(env.traffic_ahead().is_none());
        let mk = |s, v| TrafficVehicle {
            track_s: s,
            speed_kmh: v,
            half_length: 2.2,
            half_width: 0.9,
        };
        env.set_traffic(vec![mk(40.0, 12.0), mk(20.0, 18.0), mk(300.0, 5.0)]);
        let (gap, v) = env.traffic_ahead().unwrap();
        assert!((gap - 20.0).abs() < 1e-9);
        assert_eq!(v, 18.0);
    }
}
