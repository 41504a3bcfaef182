//! Lane-following reinforcement learning stack.
//!
//! A 2D kinematic driving simulator with traffic, a family of lane-keeping
//! rewards, an episode-indexed two-fold curriculum, a from-scratch PPO-Clip
//! trainer with a squashed Gaussian policy, a VAE observation encoder and
//! an experiment harness that records distance and average-speed metrics.

pub mod checkpoint;
pub mod curriculum;
pub mod error;
pub mod geom;
pub mod harness;
pub mod nn;
pub mod observation;
pub mod rewards;
pub mod rl;
pub mod sim;
pub mod track;

pub use error::{Error, Result};
