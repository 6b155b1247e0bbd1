//! Deterministic articulated rigid-body simulation: point-mass kinematic
//! tree, PD joint control, penalty ground contact.
//!
//! One simulator state is owned by one caller at a time; parallel episodes
//! use independent states and share nothing mutable.

pub mod config;
pub mod engine;
pub mod observe;
pub mod state;

pub use config::SimConfig;
pub use engine::{
    body_kinematics, max_penetration, mechanical_energy, reset_from_derivs, reset_to_pose, step,
    step_toward, BodyKinematics,
};
pub use observe::{
    build_observation, check_termination, observation_dim, FrameQuantities, OBS_LAYOUT_VERSION,
    TERMINATION_MPJPE_M,
};
pub use state::{Action, SimCharacterState};
