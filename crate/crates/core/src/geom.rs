//! Minimal planar geometry used by the track, simulator and rasterizer.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector pointing along `heading` (radians, counter-clockwise from +x).
    pub fn from_heading(heading: f64) -> Self {
        let (s, c) = heading.sin_cos();
        Vec2 { x: c, y: s }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product; positive when `other` is to the left of `self`.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Rotated 90 degrees counter-clockwise.
    pub fn perp(self) -> Vec2 {
        Vec2 {
            x: -self.y,
            y: self.x,
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    if a > PI {
        a - TAU
    } else {
        a
    }
}

/// Oriented rectangle: center, heading of the long axis, half extents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    pub center: Vec2,
    pub heading: f64,
    pub half_length: f64,
    pub half_width: f64,
}

impl OrientedBox {
    fn axes(&self) -> (Vec2, Vec2) {
        let fwd = Vec2::from_heading(self.heading);
        (fwd, fwd.perp())
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let (fwd, left) = self.axes();
        let rel = p - self.center;
        rel.dot(fwd).abs() <= self.half_length && rel.dot(left).abs() <= self.half_width
    }

    /// Separating-axis test on the four face normals.
    pub fn overlaps(&self, other: &OrientedBox) -> bool {
        let (a_fwd, a_left) = self.axes();
        let (b_fwd, b_left) = other.axes();
        let delta = other.center - self.center;
        [a_fwd, a_left, b_fwd, b_left].into_iter().all(|axis| {
            let ra = self.half_length * a_fwd.dot(axis).abs() + self.half_width * a_left.dot(axis).abs();
            let rb = other.half_length * b_fwd.dot(axis).abs()
                + other.half_width * b_left.dot(axis).abs();
            delta.dot(axis).abs() <= ra + rb
        })
    }
}
