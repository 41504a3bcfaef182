//! Per-step reward components and the two composite rewards.
//!
//! Everything here is a pure function of scalars so that a stored trajectory
//! can be re-scored under either reward flavor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardParams {
    /// Radians.
    pub alpha_max: f64,
    /// Metres.
    pub d_max: f64,
    /// km/h.
    pub v_min: f64,
    /// km/h.
    pub v_target: f64,
    /// km/h.
    pub v_max: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            alpha_max: std::f64::consts::PI / 9.0,
            d_max: 3.0,
            v_min: 15.0,
            v_target: 60.0,
            v_max: 105.0,
        }
    }
}

impl RewardParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.alpha_max > 0.0
            && self.d_max > 0.0
            && 0.0 < self.v_min
            && self.v_min < self.v_target
            && self.v_target < self.v_max;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("reward parameters {self:?}")))
        }
    }
}

/// `max(1 - |alpha / alpha_max|, 0)`.
pub fn angle_reward(alpha: f64, params: &RewardParams) -> f64 {
    (1.0 - (alpha / params.alpha_max).abs()).max(0.0)
}

/// `1 - d / d_max` for `d` in `[0, d_max]`.
pub fn centering_reward(d: f64, params: &RewardParams) -> Result<f64> {
    if !(0.0..=params.d_max).contains(&d) {
        return Err(Error::OutOfDomain {
            what: "lateral offset d",
            value: d,
        });
    }
    Ok(1.0 - d / params.d_max)
}

fn check_speed(v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            what: "speed v",
            value: v,
        })
    }
}

/// Ramp up to `v_min`, flat plateau of 1 up to `v_target`, linear decay to
/// 0 at `v_max`. Speeds above `v_max` score 0.
pub fn speed_reward_original(v: f64, params: &RewardParams) -> Result<f64> {
    check_speed(v)?;
    let p = params;
    Ok(if v < p.v_min {
        v / p.v_min
    } else if v <= p.v_target {
        1.0
    } else if v <= p.v_max {
        1.0 - (v - p.v_target) / (p.v_max - p.v_target)
    } else {
        0.0
    })
}

/// Ramp to 0.5 at `v_min`, linear rise to 1 at `v_target`, linear decay to
/// 0 at `v_max`. Speeds above `v_max` score 0.
pub fn speed_reward_revised(v: f64, params: &RewardParams) -> Result<f64> {
    check_speed(v)?;
    let p = params;
    Ok(if v < p.v_min {
        0.5 * v / p.v_min
    } else if v <= p.v_target {
        1.0 - 0.5 * (p.v_target - v) / (p.v_target - p.v_min)
    } else if v <= p.v_max {
        (p.v_max - v) / (p.v_max - p.v_target)
    } else {
        0.0
    })
}

/// `max(-1, -log10(max(1, Ic)))`, in `[-1, 0]`.
pub fn collision_penalty(intensity: f64) -> Result<f64> {
    if !(intensity >= 0.0) {
        return Err(Error::OutOfDomain {
            what: "collision intensity",
            value: intensity,
        });
    }
    Ok((-(intensity.max(1.0).log10())).max(-1.0))
}

/// `r_alpha * r_d * r_v`.
pub fn composite_original(alpha: f64, d: f64, v: f64, params: &RewardParams) -> Result<f64> {
    Ok(angle_reward(alpha, params) * centering_reward(d, params)? * speed_reward_original(v, params)?)
}

/// `r_alpha * r_d * r_v' + r_c`, where the collision term is only added
/// when `collision_term_enabled`.
pub fn composite_revised(
    alpha: f64,
    d: f64,
    v: f64,
    intensity: f64,
    collision_term_enabled: bool,
    params: &RewardParams,
) -> Result<f64> {
    let shaped =
        angle_reward(alpha, params) * centering_reward(d, params)? * speed_reward_revised(v, params)?;
    let penalty = collision_penalty(intensity)?;
    Ok(if collision_term_enabled {
        shaped + penalty
    } else {
        shaped
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const P: RewardParams = RewardParams {
        alpha_max: PI / 9.0,
        d_max: 3.0,
        v_min: 15.0,
        v_target: 60.0,
        v_max: 105.0,
    };

    #[test]
    fn angle_points() {
        assert_eq!(angle_reward(0.0, &P), 1.0);
        assert_eq!(angle_reward(PI / 9.0, &P), 0.0);
        assert_eq!(angle_reward(-PI / 9.0, &P), 0.0);
        assert!((angle_reward(PI / 18.0, &P) - 0.5).abs() < 1e-12);
        assert_eq!(angle_reward(1.0, &P), 0.0);
    }

    #[test]
    fn centering_points() {
        assert_eq!(centering_reward(0.0, &P).unwrap(), 1.0);
        assert_eq!(centering_reward(3.0, &P).unwrap(), 0.0);
        assert_eq!(centering_reward(1.5, &P).unwrap(), 0.5);
        assert!(centering_reward(-0.1, &P).is_err());
        assert!(centering_reward(3.1, &P).is_err());
    }

    #[test]
    fn speed_points() {
        let orig = |v| speed_reward_original(v, &P).unwrap();
        let rev = |v| speed_reward_revised(v, &P).unwrap();
        assert_eq!(orig(15.0), 1.0);
        assert_eq!(orig(60.0), 1.0);
        assert_eq!(orig(105.0), 0.0);
        assert_eq!(orig(82.5), 0.5);
        assert_eq!(rev(15.0), 0.5);
        assert_eq!(rev(60.0), 1.0);
        assert_eq!(rev(37.5), 0.75);
        assert_eq!(rev(105.0), 0.0);
        assert_eq!(orig(130.0), 0.0);
        assert_eq!(rev(130.0), 0.0);
        assert!(speed_reward_original(-1.0, &P).is_err());
        assert!(speed_reward_revised(f64::NAN, &P).is_err());
    }

    #[test]
    fn collision_points() {
        assert_eq!(collision_penalty(0.0).unwrap(), 0.0);
        assert_eq!(collision_penalty(10.0).unwrap(), -1.0);
        assert!((collision_penalty(10f64.sqrt()).unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(collision_penalty(1e6).unwrap(), -1.0);
        assert!(collision_penalty(-0.5).is_err());
    }

    #[test]
    fn composite_points() {
        assert_eq!(composite_original(0.0, 0.0, 60.0, &P).unwrap(), 1.0);
        assert_eq!(composite_original(PI / 9.0, 1.0, 30.0, &P).unwrap(), 0.0);
        assert!((composite_original(PI / 18.0, 1.5, 82.5, &P).unwrap() - 0.125).abs() < 1e-12);
        assert_eq!(composite_revised(0.0, 0.0, 60.0, 0.0, true, &P).unwrap(), 1.0);
        assert_eq!(composite_revised(0.0, 0.0, 60.0, 10.0, true, &P).unwrap(), 0.0);
        assert_eq!(composite_revised(0.0, 0.0, 60.0, 10.0, false, &P).unwrap(), 1.0);
        assert_eq!(composite_revised(0.0, 0.0, 15.0, 0.0, true, &P).unwrap(), 0.5);
    }

    #[test]
    fn validate_params() {
        assert!(P.validate().is_ok());
        let mut bad = P;
        bad.v_target = 10.0;
        assert!(bad.validate().is_err());
    }

    proptest::proptest! {
        #[test]
        fn revised_peaks_at_target(a in 0.0..105.0f64, b in 0.0..105.0f64) {
            let r = |v| speed_reward_revised(v, &P).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            if hi <= 60.0 && lo < hi {
                proptest::prop_assert!(r(lo) < r(hi));
            }
            if lo >= 60.0 && lo < hi {
                proptest::prop_assert!(r(lo) > r(hi));
            }
            proptest::prop_assert!(r(a) <= r(60.0));
        }

        #[test]
        fn penalty_non_increasing(a in 0.0..1e4f64, b in 0.0..1e4f64) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let (pl, ph) = (collision_penalty(lo).unwrap(), collision_penalty(hi).unwrap());
            proptest::prop_assert!(ph <= pl && (-1.0..=0.0).contains(&ph));
            if hi <= 1.0 {
                proptest::prop_assert_eq!(ph, 0.0);
            }
        }

        #[test]
        fn shaping_terms_lipschitz(a in -1.0..1.0f64, b in -1.0..1.0f64, c in 0.0..3.0f64, d in 0.0..3.0f64) {
            let da = (angle_reward(a, &P) - angle_reward(b, &P)).abs();
            proptest::prop_assert!(da <= (a.abs() - b.abs()).abs() / P.alpha_max + 1e-12);
            let dd = (centering_reward(c, &P).unwrap() - centering_reward(d, &P).unwrap()).abs();
            proptest::prop_assert!(dd <= (c - d).abs() / P.d_max + 1e-12);
        }
    }
}
