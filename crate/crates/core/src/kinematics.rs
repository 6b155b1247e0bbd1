//! Forward kinematics, finite-difference velocities, and MPJPE.

use crate::error::{MorphError, Result};
use crate::math::{rotation_vector_between, Quat, Vec3};
use crate::motion::{MotionSequence, Pose};
use crate::skeleton::Skeleton;

/// World position and orientation of every joint for one pose.
#[derive(Debug, Clone)]
pub struct JointTransforms {
    pub positions: Vec<Vec3>,
    pub rotations: Vec<Quat>,
}

/// Child world position = parent position + parent rotation * offset;
/// world rotation composes down the tree. The root's offset is ignored,
/// its world position is `root_pos`.
pub fn forward_kinematics(skeleton: &Skeleton, pose: &Pose) -> Result<JointTransforms> {
    if pose.joint_rot.len() != skeleton.len() {
        return Err(MorphError::Structural(format!(
            "pose has {} rotations for a {}-joint skeleton",
            pose.joint_rot.len(),
            skeleton.len()
        )));
    }
    let n = skeleton.len();
    let mut positions = Vec::with_capacity(n);
    let mut rotations = Vec::with_capacity(n);
    for (i, joint) in skeleton.joints().iter().enumerate() {
        match joint.parent {
            None => {
                positions.push(pose.root_pos);
                rotations.push(pose.joint_rot[0]);
            }
            Some(p) => {
                let pos = positions[p] + rotations[p] * joint.offset;
                positions.push(pos);
                rotations.push(rotations[p] * pose.joint_rot[i]);
            }
        }
    }
    Ok(JointTransforms {
        positions,
        rotations,
    })
}

/// Per-frame world joint positions plus backward-difference velocities.
///
/// `lin_vel[l] = (pos[l] - pos[l-1]) * fps` for l >= 1; `ang_vel[l]` is the
/// rotation vector of `rot[l-1]⁻¹ ∘ rot[l]` scaled by fps (the joint's
/// relative angular velocity in its local frame). Frame 0 copies frame 1.
#[derive(Debug, Clone)]
pub struct MotionDerivatives {
    pub joint_pos: Vec<Vec<Vec3>>,
    pub joint_world_rot: Vec<Vec<Quat>>,
    pub lin_vel: Vec<Vec<Vec3>>,
    pub ang_vel: Vec<Vec<Vec3>>,
}

impl MotionDerivatives {
    pub fn frame_count(&self) -> usize {
        self.joint_pos.len()
    }
}

pub fn derive_velocities(skeleton: &Skeleton, seq: &MotionSequence) -> Result<MotionDerivatives> {
    if seq.len() < 2 {
        return Err(MorphError::InvalidInput(
            "derive_velocities needs at least 2 frames".into(),
        ));
    }
    let fps = seq.fps as f64;
    let mut joint_pos = Vec::with_capacity(seq.len());
    let mut joint_world_rot = Vec::with_capacity(seq.len());
    for frame in &seq.frames {
        let t = forward_kinematics(skeleton, frame)?;
        joint_pos.push(t.positions);
        joint_world_rot.push(t.rotations);
    }
    let n = skeleton.len();
    let mut lin_vel = vec![vec![Vec3::zeros(); n]; seq.len()];
    let mut ang_vel = vec![vec![Vec3::zeros(); n]; seq.len()];
    for l in 1..seq.len() {
        for j in 0..n {
            lin_vel[l][j] = (joint_pos[l][j] - joint_pos[l - 1][j]) * fps;
            ang_vel[l][j] =
                rotation_vector_between(&seq.frames[l - 1].joint_rot[j], &seq.frames[l].joint_rot[j])
                    * fps;
        }
    }
    lin_vel[0] = lin_vel[1].clone();
    ang_vel[0] = ang_vel[1].clone();
    Ok(MotionDerivatives {
        joint_pos,
        joint_world_rot,
        lin_vel,
        ang_vel,
    })
}

/// Mean per-joint position error between two sequences, in meters.
pub fn mpjpe(skeleton: &Skeleton, a: &MotionSequence, b: &MotionSequence) -> Result<f64> {
    if a.len() != b.len() {
        return Err(MorphError::InvalidInput(format!(
            "mpjpe: frame counts differ ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.frames[0].joint_rot.len() != b.frames[0].joint_rot.len() {
        return Err(MorphError::Structural(
            "mpjpe: sequences use different skeletons".into(),
        ));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (fa, fb) in a.frames.iter().zip(&b.frames) {
        total += pose_mpjpe(skeleton, fa, fb)?;
        count += 1;
    }
    Ok(total / count as f64)
}

/// MPJPE of a single pose pair.
pub fn pose_mpjpe(skeleton: &Skeleton, a: &Pose, b: &Pose) -> Result<f64> {
    let ta = forward_kinematics(skeleton, a)?;
    let tb = forward_kinematics(skeleton, b)?;
    let n = skeleton.len() as f64;
    Ok(ta
        .positions
        .iter()
        .zip(&tb.positions)
        .map(|(pa, pb)| (pa - pb).norm())
        .sum::<f64>()
        / n)
}

/// Mass-weighted center of mass of a pose.
pub fn center_of_mass(skeleton: &Skeleton, positions: &[Vec3]) -> Vec3 {
    let mut com = Vec3::zeros();
    let mut mass = 0.0;
    for (j, p) in skeleton.joints().iter().zip(positions) {
        com += p * j.mass;
        mass += j.mass;
    }
    com / mass
}

/// Lowest collision-sphere bottom (joint z minus its radius) of a pose.
pub fn lowest_sphere_bottom(skeleton: &Skeleton, positions: &[Vec3]) -> f64 {
    skeleton
        .joints()
        .iter()
        .zip(positions)
        .map(|(j, p)| p.z - j.collision_radius)
        .fold(f64::INFINITY, f64::min)
}
