//! Small differentiable building blocks: a batched MLP with a hand-written
//! reverse pass and a bias-corrected Adam optimizer.

mod adam;
mod mlp;

pub use adam::AdamState;
pub use mlp::{param_count, Mlp, MlpCache};
