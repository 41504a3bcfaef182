//! Episode-indexed schedule for traffic volume and collision-penalty gating.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rewards::{self, RewardParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    /// Original reward, constant traffic, no collision term.
    Sca,
    /// Revised reward, constant traffic, collision term from the switch episode.
    #[serde(rename = "onefold")]
    OneFoldCl,
    /// Revised reward, traffic and collision term both introduced at the switch episode.
    Curla,
}

impl AgentKind {
    pub const ALL: [AgentKind; 3] = [AgentKind::Sca, AgentKind::OneFoldCl, AgentKind::Curla];

    pub fn reward_flavor(self) -> RewardFlavor {
        match self {
            AgentKind::Sca => RewardFlavor::Original,
            AgentKind::OneFoldCl | AgentKind::Curla => RewardFlavor::Revised,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Sca => "sca",
            AgentKind::OneFoldCl => "onefold",
            AgentKind::Curla => "curla",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AgentKind::Sca => "SCA",
            AgentKind::OneFoldCl => "One-Fold CL",
            AgentKind::Curla => "CuRLA",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sca" => Ok(AgentKind::Sca),
            "onefold" | "onefoldcl" | "one-fold" => Ok(AgentKind::OneFoldCl),
            "curla" => Ok(AgentKind::Curla),
            other => Err(Error::InvalidConfig(format!("unknown agent variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardFlavor {
    Original,
    Revised,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentVariant {
    pub kind: AgentKind,
    pub switch_episode: usize,
    pub total_episodes: usize,
    pub traffic_max: usize,
    pub traffic_ramp_episodes: usize,
}

impl AgentVariant {
    /// Full-length schedule: 3500 episodes, switch at 1500, ramp over 1000.
    pub fn paper(kind: AgentKind) -> Self {
        AgentVariant {
            kind,
            switch_episode: 1500,
            total_episodes: 3500,
            traffic_max: 6,
            traffic_ramp_episodes: 1000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0 < self.switch_episode && self.switch_episode < self.total_episodes) {
            return Err(Error::InvalidConfig(format!(
                "switch_episode {} must lie in (0, {})",
                self.switch_episode, self.total_episodes
            )));
        }
        if self.traffic_ramp_episodes == 0 {
            return Err(Error::InvalidConfig("traffic_ramp_episodes must be >= 1".into()));
        }
        Ok(())
    }

    fn check_episode(&self, episode: usize) -> Result<()> {
        if episode < self.total_episodes {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                what: "episode index",
                value: episode as f64,
            })
        }
    }

    pub fn traffic_count_for_episode(&self, episode: usize) -> Result<usize> {
        self.check_episode(episode)?;
        Ok(match self.kind {
            AgentKind::Sca | AgentKind::OneFoldCl => self.traffic_max,
            AgentKind::Curla => {
                if episode < self.switch_episode {
                    0
                } else {
                    // integer form of floor(max * min(1, k / ramp))
                    let k = (episode - self.switch_episode + 1).min(self.traffic_ramp_episodes);
                    self.traffic_max * k / self.traffic_ramp_episodes
                }
            }
        })
    }

    pub fn collision_penalty_enabled(&self, episode: usize) -> Result<bool> {
        self.check_episode(episode)?;
        Ok(match self.kind {
            AgentKind::Sca => false,
            AgentKind::OneFoldCl | AgentKind::Curla => episode >= self.switch_episode,
        })
    }

    pub fn reward_for_step(
        &self,
        episode: usize,
        alpha: f64,
        d: f64,
        v: f64,
        intensity: f64,
        params: &RewardParams,
    ) -> Result<f64> {
        match self.kind.reward_flavor() {
            RewardFlavor::Original => {
                self.check_episode(episode)?;
                rewards::composite_original(alpha, d, v, params)
            }
            RewardFlavor::Revised => {
                let gate = self.collision_penalty_enabled(episode)?;
                rewards::composite_revised(alpha, d, v, intensity, gate, params)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curla_ramp_points() {
        let v = AgentVariant::paper(AgentKind::Curla);
        assert_eq!(v.traffic_count_for_episode(0).unwrap(), 0);
        assert_eq!(v.traffic_count_for_episode(1499).unwrap(), 0);
        assert_eq!(v.traffic_count_for_episode(1500).unwrap(), 0);
        // floor(6 * 167 / 1000) = 1
        assert_eq!(v.traffic_count_for_episode(1666).unwrap(), 1);
        assert_eq!(v.traffic_count_for_episode(2498).unwrap(), 5);
        assert_eq!(v.traffic_count_for_episode(2499).unwrap(), 6);
        assert_eq!(v.traffic_count_for_episode(2500).unwrap(), 6);
        assert_eq!(v.traffic_count_for_episode(3499).unwrap(), 6);
        assert!(v.traffic_count_for_episode(3500).is_err());
    }

    #[test]
    fn step_ramp() {
        let mut v = AgentVariant::paper(AgentKind::Curla);
        v.traffic_ramp_episodes = 1;
        assert_eq!(v.traffic_count_for_episode(1499).unwrap(), 0);
        assert_eq!(v.traffic_count_for_episode(1500).unwrap(), 6);
    }

    #[test]
    fn onefold_and_sca_constant_traffic() {
        for kind in [AgentKind::OneFoldCl, AgentKind::Sca] {
            let v = AgentVariant::paper(kind);
            assert_eq!(v.traffic_count_for_episode(0).unwrap(), 6);
        }
    }

    #[test]
    fn gating() {
        let c = AgentVariant::paper(AgentKind::Curla);
        assert!(!c.collision_penalty_enabled(1499).unwrap());
        assert!(c.collision_penalty_enabled(1500).unwrap());
        let s = AgentVariant::paper(AgentKind::Sca);
        assert!((0..3500).all(|e| !s.collision_penalty_enabled(e).unwrap()));
    }

    #[test]
    fn reward_dispatch() {
        let p = RewardParams::default();
        let s = AgentVariant::paper(AgentKind::Sca);
        let c = AgentVariant::paper(AgentKind::Curla);
        assert_eq!(s.reward_for_step(10, 0.0, 0.0, 60.0, 10.0, &p).unwrap(), 1.0);
        assert_eq!(c.reward_for_step(2000, 0.0, 0.0, 60.0, 10.0, &p).unwrap(), 0.0);
        assert_eq!(c.reward_for_step(100, 0.0, 0.0, 15.0, 0.0, &p).unwrap(), 0.5);
    }

    #[test]
    fn parse_kinds() {
        for k in AgentKind::ALL {
            assert_eq!(k.as_str().parse::<AgentKind>().unwrap(), k);
        }
        assert!("dqn".parse::<AgentKind>().is_err());
    }

    #[test]
    fn validation() {
        let mut v = AgentVariant::paper(AgentKind::Curla);
        assert!(v.validate().is_ok());
        v.switch_episode = 3500;
        assert!(v.validate().is_err());
        v.switch_episode = 100;
        v.traffic_ramp_episodes = 0;
        assert!(v.validate().is_err());
    }
}
