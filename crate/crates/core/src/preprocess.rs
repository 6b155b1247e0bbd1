//! Tilt correction and floor alignment applied before simulation.
//!
//! Generated clips often lean and hover or sink relative to the ground.
//! Both defects destabilize the simulated character, so every sequence is
//! straightened (when the lean exceeds a threshold) and shifted so its
//! reference frame rests exactly on the ground plane.

use serde::{Deserialize, Serialize};

use crate::error::{MorphError, Result};
use crate::kinematics::{forward_kinematics, lowest_sphere_bottom};
use crate::math::{Quat, Vec3};
use crate::motion::{MotionSequence, Pose};
use crate::skeleton::Skeleton;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PreprocessParams {
    /// Lean angle above which posture is corrected, in degrees.
    pub tilt_threshold_deg: f64,
    /// Frame the tilt and ground offset are measured on.
    pub reference_frame: usize,
}

impl Default for PreprocessParams {
    fn default() -> Self {
        PreprocessParams {
            tilt_threshold_deg: 10.0,
            reference_frame: 0,
        }
    }
}

impl PreprocessParams {
    pub fn validate(&self, seq_len: usize) -> Result<()> {
        if !(self.tilt_threshold_deg > 0.0 && self.tilt_threshold_deg < 90.0) {
            return Err(MorphError::InvalidInput(format!(
                "tilt threshold {} outside (0, 90)",
                self.tilt_threshold_deg
            )));
        }
        if self.reference_frame >= seq_len {
            return Err(MorphError::InvalidInput(format!(
                "reference frame {} >= sequence length {}",
                self.reference_frame, seq_len
            )));
        }
        Ok(())
    }
}

/// Midpoint of the feet joints in world coordinates.
fn feet_midpoint(skeleton: &Skeleton, positions: &[Vec3]) -> Vec3 {
    let feet = skeleton.foot_indices();
    let mut mid = Vec3::zeros();
    for &f in feet {
        mid += positions[f];
    }
    mid / feet.len() as f64
}

/// Body lean of a pose, in degrees.
///
/// The lean is the angle between the vertical (the line the center of mass
/// projects along onto the ground) and the line connecting the feet
/// midpoint to the pelvis. An upright pose where the center of mass
/// projects directly below the pelvis measures 0; range [0, 180).
pub fn tilt_angle(skeleton: &Skeleton, pose: &Pose) -> Result<f64> {
    let t = forward_kinematics(skeleton, pose)?;
    let pelvis = t.positions[skeleton.pelvis_index()];
    let mid = feet_midpoint(skeleton, &t.positions);
    let up_line = pelvis - mid;
    let len = up_line.norm();
    if len < 1e-9 {
        return Err(MorphError::DegenerateGeometry(
            "pelvis coincides with the feet midpoint".into(),
        ));
    }
    let cosine = (up_line.z / len).clamp(-1.0, 1.0);
    Ok(cosine.acos().to_degrees())
}

/// Rotation that undoes a measured lean: carries the feet-to-pelvis line
/// of the reference frame onto the vertical, about the lateral axis
/// through the feet midpoint. Returns the axis anchor point and rotation.
fn righting_rotation(skeleton: &Skeleton, pose: &Pose) -> Result<(Vec3, Quat)> {
    let t = forward_kinematics(skeleton, pose)?;
    let pelvis = t.positions[skeleton.pelvis_index()];
    let mid = feet_midpoint(skeleton, &t.positions);
    let up_line = pelvis - mid;
    let len = up_line.norm();
    if len < 1e-9 {
        return Err(MorphError::DegenerateGeometry(
            "pelvis coincides with the feet midpoint".into(),
        ));
    }
    let u = up_line / len;
    let axis = u.cross(&Vec3::z());
    let axis_norm = axis.norm();
    if axis_norm < 1e-12 {
        // Already vertical (or anti-vertical; nothing sensible to do).
        return Ok((mid, Quat::identity()));
    }
    let angle = (u.z).clamp(-1.0, 1.0).acos();
    let rot = Quat::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle);
    Ok((mid, rot))
}

/// Apply one fixed rigid rotation (the inverse of the lean measured on the
/// reference frame) to the root of every frame. Frame count, fps, and all
/// non-root rotations are unchanged.
pub fn correct_tilt(
    skeleton: &Skeleton,
    seq: &MotionSequence,
    reference_frame: usize,
) -> Result<MotionSequence> {
    if reference_frame >= seq.len() {
        return Err(MorphError::InvalidInput(format!(
            "reference frame {} out of range",
            reference_frame
        )));
    }
    let (anchor, rot) = righting_rotation(skeleton, &seq.frames[reference_frame])?;
    let mut out = seq.clone();
    for frame in &mut out.frames {
        frame.root_pos = anchor + rot * (frame.root_pos - anchor);
        frame.joint_rot[0] = rot * frame.joint_rot[0];
    }
    Ok(out)
}

/// Shift every frame's root vertically so the reference frame's lowest
/// collision-sphere bottom lands exactly on the ground plane.
pub fn ground_align(
    skeleton: &Skeleton,
    seq: &MotionSequence,
    reference_frame: usize,
) -> Result<MotionSequence> {
    if reference_frame >= seq.len() {
        return Err(MorphError::InvalidInput(format!(
            "reference frame {} out of range",
            reference_frame
        )));
    }
    let t = forward_kinematics(skeleton, &seq.frames[reference_frame])?;
    let h = lowest_sphere_bottom(skeleton, &t.positions);
    let mut out = seq.clone();
    for frame in &mut out.frames {
        frame.root_pos.z -= h;
    }
    Ok(out)
}

/// Full preprocessing pass: measure lean on the reference frame, correct
/// it only when it exceeds the threshold (strictly), then ground-align.
pub fn preprocess(
    skeleton: &Skeleton,
    seq: &MotionSequence,
    params: &PreprocessParams,
) -> Result<MotionSequence> {
    params.validate(seq.len())?;
    let angle = tilt_angle(skeleton, &seq.frames[params.reference_frame])?;
    let tilted = if angle > params.tilt_threshold_deg {
        correct_tilt(skeleton, seq, params.reference_frame)?
    } else {
        seq.clone()
    };
    ground_align(skeleton, &tilted, params.reference_frame)
}
