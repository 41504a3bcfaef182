use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::sim::Env;

pub const LANE_INTENSITY: f64 = 0.5;
pub const CENTERLINE_INTENSITY: f64 = 0.8;
pub const TRAFFIC_INTENSITY: f64 = 1.0;

/// Ego-centric raster window. Row 0 is the far edge ahead of the agent,
/// column 0 is the agent's left edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RasterConfig {
    pub width: usize,
    pub height: usize,
    /// Metres visible ahead of the agent.
    pub ahead: f64,
    /// Metres visible behind the agent.
    pub behind: f64,
    /// Half-width of the window in metres.
    pub lateral: f64,
    /// Half-width of the painted centerline stripe in metres.
    pub centerline_half_width: f64,
}

impl Default for RasterConfig {
    fn default() -> Self {
        RasterConfig {
            width: 40,
            height: 80,
            ahead: 40.0,
            behind: 10.0,
            lateral: 7.5,
            centerline_half_width: 0.3,
        }
    }
}

impl RasterConfig {
    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    /// Row index containing the agent's reference point.
    pub fn agent_row(&self) -> usize {
        ((self.ahead / (self.ahead + self.behind)) * self.height as f64) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RasterFrame {
    pub width: usize,
    pub height: usize,
    /// Row-major intensities in `[0, 1]`.
    pub values: Vec<f64>,
}

impl RasterFrame {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }
}

/// Paints lane band, centerline stripe and traffic footprints around the
/// agent. Traffic overrides centerline, which overrides the lane band.
pub fn rasterize(env: &Env, config: &RasterConfig) -> RasterFrame {
    let agent = env.agent();
    let track = env.track();
    let fwd = Vec2::from_heading(agent.heading);
    let left = fwd.perp();
    let px_h = (config.ahead + config.behind) / config.height as f64;
    let px_w = 2.0 * config.lateral / config.width as f64;

    let reach = config.ahead.max(config.behind) + config.lateral + track.lane_half_width() + 2.0;
    let s0 = env.projection().nearest_s;
    let segments = track.segments_between(s0 - reach, s0 + reach);
    let view_radius = config.ahead.max(config.behind).hypot(config.lateral);
    let boxes: Vec<_> = env
        .traffic()
        .iter()
        .map(|v| v.footprint(track))
        .filter(|b| b.center.distance(agent.position) <= view_radius + b.half_length + b.half_width)
        .collect();

    let mut values = vec![0.0; config.pixels()];
    for row in 0..config.height {
        let forward = config.ahead - (row as f64 + 0.5) * px_h;
        for col in 0..config.width {
            let lateral = config.lateral - (col as f64 + 0.5) * px_w;
            let p = agent.position + fwd * forward + left * lateral;
            let value = if boxes.iter().any(|b| b.contains(p)) {
                TRAFFIC_INTENSITY
            } else {
                let d = segments
                    .iter()
                    .map(|&i| track.segment_distance(i, p))
                    .fold(f64::INFINITY, f64::min);
                if d <= config.centerline_half_width {
                    CENTERLINE_INTENSITY
                } else if d <= track.lane_half_width() {
                    LANE_INTENSITY
                } else {
                    0.0
                }
            };
            values[row * config.width + col] = value;
        }
    }
    RasterFrame {
        width: config.width,
        height: config.height,
        values,
    }
}
