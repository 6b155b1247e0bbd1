//! Minimal dense-network substrate: f64 MLPs with exact reverse-mode
//! gradients, bias-corrected Adam, and JSON checkpoints.
//!
//! Parameters are plain values; rollout workers hold immutable clones
//! while a single trainer owns the mutable copy.

pub mod adam;
pub mod checkpoint;
pub mod mlp;

pub use adam::{AdamConfig, AdamState};
pub use checkpoint::{Checkpoint, CheckpointRole};
pub use mlp::{ForwardCache, MlpGrads, MlpParams, OutputActivation};

/// Default hidden sizes for the policy and value networks.
pub const POLICY_HIDDEN: [usize; 2] = [512, 256];
/// Default hidden sizes for the discriminator.
pub const DISC_HIDDEN: [usize; 2] = [256, 128];
/// Hidden-layer init gain (sqrt 2); final policy layers use 0.01.
pub const HIDDEN_GAIN: f64 = std::f64::consts::SQRT_2;
pub const POLICY_FINAL_GAIN: f64 = 0.01;
