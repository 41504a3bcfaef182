use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::curriculum::{AgentKind, AgentVariant};
use crate::error::{Error, Result};
use crate::observation::{LatentMode, ObservationMode, RasterConfig, VaeConfig};
use crate::rewards::RewardParams;
use crate::rl::PpoHyper;
use crate::sim::EnvConfig;
use crate::track::TrackSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// 3500 episodes, switch at 1500, VAE observations.
    Paper,
    /// 400 episodes, switch at 150, bypass observations.
    Desk,
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Profile::Paper),
            "desk" => Ok(Profile::Desk),
            other => Err(Error::InvalidConfig(format!("unknown profile `{other}`"))),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Paper => "paper",
            Profile::Desk => "desk",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurriculumConfig {
    pub switch_episode: usize,
    pub traffic_max: usize,
    pub traffic_ramp_episodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationConfig {
    pub mode: ObservationMode,
    /// Required when `mode = "vae"`. Relative paths resolve against the
    /// config file's directory.
    pub vae_checkpoint: Option<PathBuf>,
    pub latent: LatentMode,
    pub raster: RasterConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub variant: AgentKind,
    pub total_episodes: usize,
    pub eval_every: usize,
    pub eval_episodes_per_point: usize,
    pub smoothing: f64,
    pub seeds: Vec<u64>,
    pub checkpoint_every: usize,
    /// Episodes longer than this are cut off and recorded as `truncated`.
    /// Zero disables the cap.
    pub max_episode_steps: u64,
    pub output_dir: Option<PathBuf>,
    pub curriculum: CurriculumConfig,
    pub observation: ObservationConfig,
    pub env: EnvConfig,
    pub track: TrackSpec,
    pub rewards: RewardParams,
    pub ppo: PpoHyper,
    pub vae: VaeConfig,
}

impl ExperimentConfig {
    pub fn profile(profile: Profile, variant: AgentKind) -> Self {
        let paper = AgentVariant::paper(variant);
        let mut cfg = ExperimentConfig {
            variant,
            total_episodes: paper.total_episodes,
            eval_every: 10,
            eval_episodes_per_point: 1,
            smoothing: 0.999,
            seeds: vec![0, 1, 2],
            checkpoint_every: 500,
            max_episode_steps: 0,
            output_dir: None,
            curriculum: CurriculumConfig {
                switch_episode: paper.switch_episode,
                traffic_max: paper.traffic_max,
                traffic_ramp_episodes: paper.traffic_ramp_episodes,
            },
            observation: ObservationConfig {
                mode: ObservationMode::Vae,
                vae_checkpoint: Some(PathBuf::from("vae.bin")),
                latent: LatentMode::Deterministic,
                raster: RasterConfig::default(),
            },
            env: EnvConfig::default(),
            track: TrackSpec::default(),
            rewards: RewardParams::default(),
            ppo: PpoHyper::default(),
            vae: VaeConfig::default(),
        };
        if profile == Profile::Desk {
            cfg.total_episodes = 400;
            cfg.curriculum = CurriculumConfig {
                switch_episode: 150,
                traffic_max: 4,
                traffic_ramp_episodes: 100,
            };
            cfg.observation.mode = ObservationMode::Bypass;
            cfg.observation.vae_checkpoint = None;
            cfg.max_episode_steps = 6000;
        }
        cfg
    }

    /// Profile defaults overlaid with the tables of a TOML document. Keys
    /// absent from the document keep their profile value.
    pub fn from_toml_str(text: &str, profile: Profile, variant: AgentKind) -> Result<Self> {
        let overlay: toml::Table =
            toml::from_str(text).map_err(|e| Error::format("experiment config", e.to_string()))?;
        let base = toml::Table::try_from(Self::profile(profile, variant))
            .map_err(|e| Error::format("experiment config", e.to_string()))?;
        let mut merged = toml::Value::Table(base);
        merge(&mut merged, toml::Value::Table(overlay));
        let cfg: ExperimentConfig = merged
            .try_into()
            .map_err(|e: toml::de::Error| Error::format("experiment config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, profile: Profile, variant: AgentKind) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let mut cfg = Self::from_toml_str(&std::fs::read_to_string(path)?, profile, variant)?;
        if let (Some(vae), Some(dir)) = (&cfg.observation.vae_checkpoint, path.parent()) {
            if vae.is_relative() {
                cfg.observation.vae_checkpoint = Some(dir.join(vae));
            }
        }
        Ok(cfg)
    }

    /// Unset optional paths are omitted, so the text round-trips only when
    /// read back under the profile that produced it.
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::format("experiment config", e.to_string()))
    }

    pub fn agent_variant(&self) -> AgentVariant {
        AgentVariant {
            kind: self.variant,
            switch_episode: self.curriculum.switch_episode,
            total_episodes: self.total_episodes,
            traffic_max: self.curriculum.traffic_max,
            traffic_ramp_episodes: self.curriculum.traffic_ramp_episodes,
        }
    }

    /// Number of evaluation points in a full run.
    pub fn eval_points(&self) -> usize {
        self.total_episodes.div_ceil(self.eval_every)
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_episodes == 0 {
            return Err(Error::InvalidConfig("total_episodes must be >= 1".into()));
        }
        if self.eval_every == 0 {
            return Err(Error::InvalidConfig("eval_every must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.smoothing) {
            return Err(Error::InvalidConfig(format!("smoothing {} must lie in [0, 1)", self.smoothing)));
        }
        if self.observation.mode == ObservationMode::Vae && self.observation.vae_checkpoint.is_none() {
            return Err(Error::InvalidConfig("vae observations need observation.vae_checkpoint".into()));
        }
        // a one-episode run has no room for a switch; the schedule is only
        // checked when it can be meaningful
        if self.total_episodes > 1 {
            self.agent_variant().validate()?;
        } else if self.curriculum.traffic_ramp_episodes == 0 {
            return Err(Error::InvalidConfig("traffic_ramp_episodes must be >= 1".into()));
        }
        self.env.validate()?;
        self.rewards.validate()?;
        self.ppo.validate()?;
        Ok(())
    }
}

fn merge(base: &mut toml::Value, overlay: toml::Value) {
    match (base, overlay) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles() {
        let p = ExperimentConfig::profile(Profile::Paper, AgentKind::Curla);
        assert_eq!(p.agent_variant(), AgentVariant::paper(AgentKind::Curla));
        assert_eq!(p.eval_every, 10);
        assert_eq!(p.smoothing, 0.999);
        p.validate().unwrap();
        let d = ExperimentConfig::profile(Profile::Desk, AgentKind::Sca);
        assert_eq!(d.total_episodes, 400);
        assert_eq!(d.curriculum.switch_episode, 150);
        assert_eq!(d.observation.mode, ObservationMode::Bypass);
        d.validate().unwrap();
    }

    #[test]
    fn toml_overlay_keeps_unset_keys() {
        let text = "
total_episodes = 200
[curriculum]
traffic_max = 0
[ppo]
learning_rate = 3e-4
[track]
shape = \"circle\"
radius = 40.0
";
        let c = ExperimentConfig::from_toml_str(text, Profile::Desk, AgentKind::OneFoldCl).unwrap();
        assert_eq!(c.total_episodes, 200);
        assert_eq!(c.curriculum.traffic_max, 0);
        assert_eq!(c.curriculum.switch_episode, 150);
        assert_eq!(c.ppo.learning_rate, 3e-4);
        assert_eq!(c.ppo.horizon, 128);
        assert_eq!(c.variant, AgentKind::OneFoldCl);
    }

    #[test]
    fn round_trip_through_toml() {
        let c = ExperimentConfig::profile(Profile::Paper, AgentKind::Sca);
        let text = c.to_toml_string().unwrap();
        let back = ExperimentConfig::from_toml_str(&text, Profile::Desk, AgentKind::Curla).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ExperimentConfig::from_toml_str("eval_every = 0", Profile::Desk, AgentKind::Sca).is_err());
        assert!(ExperimentConfig::from_toml_str("smoothing = 1.0", Profile::Desk, AgentKind::Sca).is_err());
        assert!(ExperimentConfig::from_toml_str("bogus = 1", Profile::Desk, AgentKind::Sca).is_err());
        assert!(ExperimentConfig::from_toml_str("[observation]\nmode = \"vae\"", Profile::Desk, AgentKind::Sca)
            .is_err());
    }

    #[test]
    fn eval_points_round_up() {
        let mut c = ExperimentConfig::profile(Profile::Desk, AgentKind::Sca);
        for (total, points) in [(1, 1), (9, 1), (10, 1), (11, 2), (100, 10), (3500, 350)] {
            c.total_episodes = total;
            assert_eq!(c.eval_points(), points);
        }
    }
}
