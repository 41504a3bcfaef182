//! Closed-loop track centerline and projection queries.
//!
//! The centerline is a piecewise-linear polyline sampled from an analytic
//! shape (circle, oval, rounded rectangle). Waypoint headings come from the
//! analytic tangent and are interpolated linearly (with wrapping) inside a
//! segment.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{wrap_angle, Vec2};

/// Largest waypoint spacing accepted by [`Track::build`].
pub const MAX_SPACING: f64 = 2.0;
/// Spacing must be strictly greater than this.
pub const MIN_SPACING: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum TrackShape {
    Circle {
        radius: f64,
    },
    /// Two straights of `straight_length` joined by semicircles of `radius`.
    Oval { straight_length: f64, radius: f64 },
    RoundedRectangle {
        width: f64,
        height: f64,
        corner_radius: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackSpec {
    #[serde(flatten)]
    pub shape: TrackShape,
    pub spacing: f64,
    pub lane_half_width: f64,
}

impl Default for TrackSpec {
    fn default() -> Self {
        TrackSpec {
            shape: TrackShape::Oval {
                straight_length: 100.0,
                radius: 20.0,
            },
            spacing: 1.0,
            lane_half_width: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub position: Vec2,
    pub tangent_heading: f64,
    pub arc_length_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackProjection {
    /// Arc length of the nearest centerline point, in `[0, L)`.
    pub nearest_s: f64,
    /// Unsigned distance to the centerline.
    pub lateral_offset_d: f64,
    /// Positive to the left of the travel direction.
    pub signed_offset: f64,
    pub tangent_heading: f64,
    pub nearest_point: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    waypoints: Vec<Waypoint>,
    total_length: f64,
    lane_half_width: f64,
}

/// Appends line and left-turning arc primitives, sampling each one at a
/// uniform spacing no larger than `max_spacing`.
struct PathSampler {
    position: Vec2,
    heading: f64,
    max_spacing: f64,
    points: Vec<(Vec2, f64)>,
}

impl PathSampler {
    fn new(max_spacing: f64) -> Self {
        PathSampler {
            position: Vec2::ZERO,
            heading: 0.0,
            max_spacing,
            points: Vec::new(),
        }
    }

    fn line(&mut self, length: f64) {
        let n = (length / self.max_spacing).ceil().max(1.0) as usize;
        let dir = Vec2::from_heading(self.heading);
        for k in 0..n {
            let t = length * k as f64 / n as f64;
            self.points.push((self.position + dir * t, self.heading));
        }
        self.position = self.position + dir * length;
    }

    fn left_arc(&mut self, radius: f64, sweep: f64) {
        let length = radius * sweep;
        let n = (length / self.max_spacing).ceil().max(1.0) as usize;
        let center = self.position + Vec2::from_heading(self.heading).perp() * radius;
        let start_angle = self.heading - PI / 2.0;
        for k in 0..n {
            let phi = sweep * k as f64 / n as f64;
            let a = start_angle + phi;
            self.points
                .push((center + Vec2::from_heading(a) * radius, wrap_angle(self.heading + phi)));
        }
        self.heading = wrap_angle(self.heading + sweep);
        self.position = center + Vec2::from_heading(start_angle + sweep) * radius;
    }
}

fn positive(what: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfDomain { what, value })
    }
}

impl Track {
    /// Samples the described shape into a closed polyline. The origin
    /// (`s = 0`) sits at the midpoint of the bottom edge, heading `+x`, and
    /// the loop is travelled counter-clockwise.
    pub fn build(spec: &TrackSpec) -> Result<Track> {
        if !(spec.spacing > MIN_SPACING && spec.spacing <= MAX_SPACING) {
            return Err(Error::OutOfDomain {
                what: "waypoint spacing",
                value: spec.spacing,
            });
        }
        positive("lane_half_width", spec.lane_half_width)?;
        let mut path = PathSampler::new(spec.spacing);
        match spec.shape {
            TrackShape::Circle { radius } => {
                positive("radius", radius)?;
                path.left_arc(radius, 2.0 * PI);
            }
            TrackShape::Oval {
                straight_length,
                radius,
            } => {
                positive("straight_length", straight_length)?;
                positive("radius", radius)?;
                path.line(straight_length / 2.0);
                path.left_arc(radius, PI);
                path.line(straight_length);
                path.left_arc(radius, PI);
                path.line(straight_length / 2.0);
            }
            TrackShape::RoundedRectangle {
                width,
                height,
                corner_radius,
            } => {
                positive("width", width)?;
                positive("height", height)?;
                positive("corner_radius", corner_radius)?;
                if 2.0 * corner_radius >= width.min(height) {
                    return Err(Error::InvalidConfig(format!(
                        "corner radius {corner_radius} too large for a {width} x {height} rectangle"
                    )));
                }
                let w = width - 2.0 * corner_radius;
                let h = height - 2.0 * corner_radius;
                path.line(w / 2.0);
                path.left_arc(corner_radius, PI / 2.0);
                path.line(h);
                path.left_arc(corner_radius, PI / 2.0);
                path.line(w);
                path.left_arc(corner_radius, PI / 2.0);
                path.line(h);
                path.left_arc(corner_radius, PI / 2.0);
                path.line(w / 2.0);
            }
        }
        Ok(Track::from_points(&path.points, spec.lane_half_width))
    }

    fn from_points(points: &[(Vec2, f64)], lane_half_width: f64) -> Track {
        let mut waypoints = Vec::with_capacity(points.len());
        let mut s = 0.0;
        for (i, &(position, heading)) in points.iter().enumerate() {
            if i > 0 {
                s += position.distance(points[i - 1].0);
            }
            waypoints.push(Waypoint {
                position,
                tangent_heading: heading,
                arc_length_s: s,
            });
        }
        let closing = points[points.len() - 1].0.distance(points[0].0);
        Track {
            waypoints,
            total_length: s + closing,
            lane_half_width,
        }
    }

    pub fn waypoints(&self) -> &[Waypoint] {
        &self.waypoints
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn lane_half_width(&self) -> f64 {
        self.lane_half_width
    }

    fn segment(&self, i: usize) -> (Waypoint, Waypoint, f64) {
        let a = self.waypoints[i];
        let b = self.waypoints[(i + 1) % self.waypoints.len()];
        let end_s = if i + 1 == self.waypoints.len() {
            self.total_length
        } else {
            b.arc_length_s
        };
        (a, b, end_s - a.arc_length_s)
    }

    fn project_segment(&self, i: usize, point: Vec2) -> (f64, f64, Vec2) {
        let (a, b, _) = self.segment(i);
        let ab = b.position - a.position;
        let len_sq = ab.norm_sq();
        let t = if len_sq > 0.0 {
            ((point - a.position).dot(ab) / len_sq).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let nearest = a.position + ab * t;
        ((point - nearest).norm_sq(), t, nearest)
    }

    fn projection_on(&self, i: usize, t: f64, nearest: Vec2, point: Vec2) -> TrackProjection {
        let (a, b, len) = self.segment(i);
        let mut s = a.arc_length_s + t * len;
        if s >= self.total_length {
            s -= self.total_length;
        }
        let dheading = wrap_angle(b.tangent_heading - a.tangent_heading);
        let tangent_heading = wrap_angle(a.tangent_heading + t * dheading);
        let rel = point - nearest;
        let d = rel.norm();
        let seg_dir = b.position - a.position;
        let side = seg_dir.cross(rel);
        let signed = if side < 0.0 { -d } else { d };
        TrackProjection {
            nearest_s: s,
            lateral_offset_d: d,
            signed_offset: signed,
            tangent_heading,
            nearest_point: nearest,
        }
    }

    /// Nearest point on the centerline polyline. Ties keep the segment with
    /// the smallest arc length.
    pub fn project(&self, point: Vec2) -> TrackProjection {
        let mut best = (f64::INFINITY, 0usize, 0.0, Vec2::ZERO);
        for i in 0..self.waypoints.len() {
            let (dist_sq, t, nearest) = self.project_segment(i, point);
            if dist_sq < best.0 {
                best = (dist_sq, i, t, nearest);
            }
        }
        self.projection_on(best.1, best.2, best.3, point)
    }

    /// Centerline point and tangent heading at arc length `s` (wrapped).
    pub fn point_at(&self, s: f64) -> (Vec2, f64) {
        let s = s.rem_euclid(self.total_length);
        let i = match self
            .waypoints
            .binary_search_by(|w| w.arc_length_s.total_cmp(&s))
        {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let (a, b, len) = self.segment(i);
        let t = if len > 0.0 {
            (s - a.arc_length_s) / len
        } else {
            0.0
        };
        let pos = a.position + (b.position - a.position) * t;
        let heading = wrap_angle(
            a.tangent_heading + t * wrap_angle(b.tangent_heading - a.tangent_heading),
        );
        (pos, heading)
    }

    /// Index range of segments whose start lies within `[s_from, s_to]`
    /// (arc length, may wrap). Used by the rasterizer to limit work.
    pub(crate) fn segments_between(&self, s_from: f64, s_to: f64) -> Vec<usize> {
        let n = self.waypoints.len();
        if s_to - s_from >= self.total_length {
            return (0..n).collect();
        }
        let from = s_from.rem_euclid(self.total_length);
        let span = s_to - s_from;
        (0..n)
            .filter(|&i| {
                let (a, _, len) = self.segment(i);
                let rel = (a.arc_length_s - from).rem_euclid(self.total_length);
                rel <= span || rel + len >= self.total_length
            })
            .collect()
    }

    /// Distance from `point` to the segment `i` of the centerline.
    pub(crate) fn segment_distance(&self, i: usize, point: Vec2) -> f64 {
        self.project_segment(i, point).0.sqrt()
    }

    /// Fraction of a lap covered by `cumulative_distance` metres of travel.
    pub fn lap_progress(&self, cumulative_distance: f64) -> Result<f64> {
        if !(cumulative_distance >= 0.0) {
            return Err(Error::OutOfDomain {
                what: "cumulative_distance",
                value: cumulative_distance,
            });
        }
        Ok(cumulative_distance / self.total_length)
    }

    /// Signed forward arc distance from `from_s` to `to_s`, in `[0, L)`.
    pub fn forward_gap(&self, from_s: f64, to_s: f64) -> f64 {
        (to_s - from_s).rem_euclid(self.total_length)
    }
}

/// Vehicle heading minus the track tangent, wrapped into `(-π, π]`.
pub fn heading_error(projection: &TrackProjection, vehicle_heading: f64) -> f64 {
    wrap_angle(vehicle_heading - projection.tangent_heading)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(radius: f64, spacing: f64) -> Track {
        Track::build(&TrackSpec {
            shape: TrackShape::Circle { radius },
            spacing,
            lane_half_width: 2.0,
        })
        .unwrap()
    }

    fn check_invariants(track: &Track) {
        let wps = track.waypoints();
        for pair in wps.windows(2) {
            assert!(pair[1].arc_length_s > pair[0].arc_length_s);
            assert!(pair[0].position.distance(pair[1].position) <= MAX_SPACING);
        }
        let last = wps.last().unwrap();
        let seam = last.position.distance(wps[0].position);
        let max_gap = wps
            .windows(2)
            .map(|p| p[0].position.distance(p[1].position))
            .fold(0.0, f64::max);
        assert!(seam <= max_gap + 1e-9);
        assert!(wrap_angle(wps[0].tangent_heading - last.tangent_heading).abs() < 0.2);
        assert!((track.total_length() - (last.arc_length_s + seam)).abs() < 1e-9);
    }

    #[test]
    fn circle_length() {
        let t = circle(50.0, 1.0);
        let expected = 2.0 * PI * 50.0;
        assert!((t.total_length() - expected).abs() / expected < 1e-3);
        check_invariants(&t);
    }

    #[test]
    fn oval_length() {
        let t = Track::build(&TrackSpec::default()).unwrap();
        let expected = 200.0 + 2.0 * PI * 20.0;
        assert!((t.total_length() - expected).abs() / expected < 1e-3, "{}", t.total_length());
        check_invariants(&t);
    }

    #[test]
    fn rounded_rectangle_length() {
        let t = Track::build(&TrackSpec {
            shape: TrackShape::RoundedRectangle {
                width: 120.0,
                height: 60.0,
                corner_radius: 15.0,
            },
            spacing: 0.5,
            lane_half_width: 2.0,
        })
        .unwrap();
        let expected = 2.0 * (90.0 + 30.0) + 2.0 * PI * 15.0;
        assert!((t.total_length() - expected).abs() / expected < 1e-3);
        check_invariants(&t);
    }

    #[test]
    fn rejects_bad_specs() {
        let mut spec = TrackSpec::default();
        spec.spacing = 5.0;
        assert!(Track::build(&spec).is_err());
        spec.spacing = 0.1;
        assert!(Track::build(&spec).is_err());
        spec.spacing = 1.0;
        spec.shape = TrackShape::Circle { radius: -1.0 };
        assert!(Track::build(&spec).is_err());
        spec.shape = TrackShape::Circle { radius: 10.0 };
        spec.lane_half_width = 0.0;
        assert!(Track::build(&spec).is_err());
    }

    #[test]
    fn projection_basics() {
        let t = circle(50.0, 1.0);
        let p = t.project(t.waypoints()[37].position);
        assert!(p.lateral_offset_d < 1e-9);
        let origin = t.project(Vec2::ZERO);
        assert_eq!(origin.nearest_s, 0.0);
        assert!(origin.lateral_offset_d < 1e-12);
    }

    /// Brute-force nearest point over a densely resampled polyline.
    fn brute_force_distance(track: &Track, p: Vec2) -> f64 {
        let n = track.waypoints().len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            let a = track.waypoints()[i].position;
            let b = track.waypoints()[(i + 1) % n].position;
            for k in 0..=200 {
                let q = a + (b - a) * (k as f64 / 200.0);
                best = best.min(q.distance(p));
            }
        }
        best
    }

    #[test]
    fn radial_offset_matches_brute_force() {
        let t = circle(50.0, 1.0);
        let center = Vec2::new(0.0, 50.0);
        for &angle in &[0.3, 1.7, 4.0] {
            let on_circle = center + Vec2::from_heading(angle - PI / 2.0) * 50.0;
            let outward = center + Vec2::from_heading(angle - PI / 2.0) * 51.5;
            let d = t.project(outward).lateral_offset_d;
            let oracle = brute_force_distance(&t, outward);
            assert!((d - oracle).abs() < 1e-3);
            assert!((d - 1.5).abs() < 0.01, "{d}");
            assert!(t.project(on_circle).lateral_offset_d < 0.01);
        }
    }

    #[test]
    fn signed_offset_left_positive() {
        let t = Track::build(&TrackSpec::default()).unwrap();
        // travelling +x along the bottom straight: +y is left
        let p = t.project(Vec2::new(10.0, 1.2));
        assert!((p.signed_offset - 1.2).abs() < 1e-9);
        let p = t.project(Vec2::new(10.0, -0.7));
        assert!((p.signed_offset + 0.7).abs() < 1e-9);
    }

    #[test]
    fn heading_error_examples() {
        let t = circle(50.0, 1.0);
        let p = t.project(Vec2::new(3.0, 0.05));
        let h = p.tangent_heading;
        assert_eq!(heading_error(&p, h), 0.0);
        assert!((heading_error(&p, h + PI / 9.0) - PI / 9.0).abs() < 1e-12);
        assert!((heading_error(&p, h - 2.0 * PI + 0.1) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn lap_progress_examples() {
        let t = circle(50.0, 1.0);
        let l = t.total_length();
        assert_eq!(t.lap_progress(0.0).unwrap(), 0.0);
        assert_eq!(t.lap_progress(l).unwrap(), 1.0);
        assert_eq!(t.lap_progress(1.5 * l).unwrap(), 1.5);
        assert!(t.lap_progress(-1.0).is_err());
    }

    #[test]
    fn point_at_wraps() {
        let t = Track::build(&TrackSpec::default()).unwrap();
        let (p0, h0) = t.point_at(0.0);
        let (p1, h1) = t.point_at(t.total_length());
        assert!(p0.distance(p1) < 1e-9);
        assert!((h0 - h1).abs() < 1e-12);
        let (p, _) = t.point_at(25.0);
        assert!((p.x - 25.0).abs() < 1e-9 && p.y.abs() < 1e-9);
    }
}
