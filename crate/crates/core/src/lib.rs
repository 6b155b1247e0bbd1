//! Motion data model, kinematics, preprocessing, and plausibility metrics.
//!
//! Everything here is a pure function of its inputs; types are immutable
//! value objects and safe to share across threads.

pub mod error;
pub mod kinematics;
pub mod math;
pub mod metrics;
pub mod motion;
pub mod preprocess;
pub mod skeleton;

pub use error::{MorphError, Result};
pub use kinematics::{
    center_of_mass, derive_velocities, forward_kinematics, lowest_sphere_bottom, mpjpe,
    pose_mpjpe, JointTransforms, MotionDerivatives,
};
pub use math::{Quat, Vec3};
pub use metrics::{
    aggregate_ifr, float_metric, penetrate, pfc, plausibility_report, skate, ContactParams,
    PlausibilityReport,
};
pub use motion::{ConditionTag, MotionSequence, Pose};
pub use preprocess::{correct_tilt, ground_align, preprocess, tilt_angle, PreprocessParams};
pub use skeleton::{default_humanoid, skeleton_by_id, Joint, Skeleton, DEFAULT_REST_ROOT_HEIGHT};
