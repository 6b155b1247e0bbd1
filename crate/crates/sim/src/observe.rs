//! Policy observations and the early-termination predicate.
//!
//! The observation pairs the reference's next pose with the residuals the
//! policy must compensate: next-reference joint rotations and positions,
//! then four difference blocks (rotation, position, velocity, angular
//! velocity). All positions and linear velocities are expressed in the
//! simulated character's heading-invariant root frame.

use nalgebra::DVector;

use morph_core::math::{heading_quat, quat_to_6d, rotation_vector_between};
use morph_core::{forward_kinematics, pose_mpjpe, MorphError, MotionDerivatives, MotionSequence,
    Pose, Quat, Result, Skeleton, Vec3};

use crate::state::SimCharacterState;

/// Observation layout version; bump when the block order changes.
pub const OBS_LAYOUT_VERSION: u32 = 1;

/// Per-frame pose quantities in a shared shape for reference and simulated
/// motion: rotations (root world + joint local), world joint positions,
/// world linear velocities, angular velocities (root body-frame + joint
/// local).
///
/// Velocities on both sides follow the same backward finite-difference
/// convention at the clip frame rate, so a perfectly tracking simulation
/// produces exactly matching quantities (and no spurious signal separates
/// reference from simulated features downstream).
#[derive(Debug, Clone)]
pub struct FrameQuantities {
    pub joint_rot: Vec<Quat>,
    pub joint_pos: Vec<Vec3>,
    pub lin_vel: Vec<Vec3>,
    pub ang_vel: Vec<Vec3>,
}

impl FrameQuantities {
    /// Extract frame `l` of a reference clip's derivatives.
    pub fn from_reference(seq: &MotionSequence, derivs: &MotionDerivatives, l: usize) -> Self {
        FrameQuantities {
            joint_rot: seq.frames[l].joint_rot.clone(),
            joint_pos: derivs.joint_pos[l].clone(),
            lin_vel: derivs.lin_vel[l].clone(),
            ang_vel: derivs.ang_vel[l].clone(),
        }
    }

    /// Snapshot the simulated character, with velocities differenced
    /// against the pose it held one control step earlier.
    pub fn from_sim(
        skeleton: &Skeleton,
        state: &SimCharacterState,
        prev_pose: &Pose,
        fps: f64,
    ) -> Result<Self> {
        let pose = state.to_pose()?;
        let now = forward_kinematics(skeleton, &pose)?;
        let before = forward_kinematics(skeleton, prev_pose)?;
        let n = skeleton.len();
        let mut lin_vel = Vec::with_capacity(n);
        let mut ang_vel = Vec::with_capacity(n);
        for j in 0..n {
            lin_vel.push((now.positions[j] - before.positions[j]) * fps);
            ang_vel.push(
                rotation_vector_between(&prev_pose.joint_rot[j], &pose.joint_rot[j]) * fps,
            );
        }
        Ok(FrameQuantities {
            joint_rot: pose.joint_rot,
            joint_pos: now.positions,
            lin_vel,
            ang_vel,
        })
    }

    /// Quantities for a freshly reset state: the pose comes from the
    /// state, velocities copy the reference's at the start frame (that is
    /// what reference-state initialization put into the simulator).
    pub fn from_sim_at_reset(
        skeleton: &Skeleton,
        state: &SimCharacterState,
        derivs: &MotionDerivatives,
        start_frame: usize,
    ) -> Result<Self> {
        let pose = state.to_pose()?;
        let now = forward_kinematics(skeleton, &pose)?;
        Ok(FrameQuantities {
            joint_rot: pose.joint_rot,
            joint_pos: now.positions,
            lin_vel: derivs.lin_vel[start_frame].clone(),
            ang_vel: derivs.ang_vel[start_frame].clone(),
        })
    }

    pub fn joint_count(&self) -> usize {
        self.joint_rot.len()
    }
}

/// Observation dimension for a skeleton: two rotation+position blocks and
/// the velocity/angular-velocity difference blocks.
pub fn observation_dim(joint_count: usize) -> usize {
    2 * (6 * joint_count + 3 * joint_count) + 3 * joint_count + 3 * joint_count
}

/// Assemble the state vector from the reference's next-frame quantities,
/// the reference's current-frame angular velocities, and the simulated
/// character. Layout (n joints):
///
/// 1. reference next rotations, 6D, root heading-normalized (6n)
/// 2. reference next positions, root-relative heading frame (3n)
/// 3. rotation residual: ref-next minus sim 6D entries (6n)
/// 4. position residual in the heading frame (3n)
/// 5. velocity residual in the heading frame (3n)
/// 6. angular-velocity residual, ref current minus sim (3n)
pub fn build_observation(
    skeleton: &Skeleton,
    ref_next: &FrameQuantities,
    ref_current_ang_vel: &[Vec3],
    sim: &FrameQuantities,
) -> Result<DVector<f64>> {
    let n = skeleton.len();
    if ref_next.joint_count() != n || sim.joint_count() != n || ref_current_ang_vel.len() != n {
        return Err(MorphError::Structural(format!(
            "observation inputs disagree with the {n}-joint skeleton"
        )));
    }
    let heading = heading_quat(&sim.joint_rot[0]);
    let inv_heading = heading.inverse();
    let anchor = Vec3::new(sim.joint_pos[0].x, sim.joint_pos[0].y, 0.0);
    let to_frame = |p: &Vec3| inv_heading * (p - anchor);

    let rot6 = |quantities: &FrameQuantities, j: usize| {
        if j == 0 {
            quat_to_6d(&(inv_heading * quantities.joint_rot[0]))
        } else {
            quat_to_6d(&quantities.joint_rot[j])
        }
    };

    let mut obs = Vec::with_capacity(observation_dim(n));
    // Block 1: reference next rotations.
    for j in 0..n {
        obs.extend_from_slice(&rot6(ref_next, j));
    }
    // Block 2: reference next positions.
    for j in 0..n {
        let p = to_frame(&ref_next.joint_pos[j]);
        obs.extend_from_slice(&[p.x, p.y, p.z]);
    }
    // Block 3: rotation residual.
    for j in 0..n {
        let a = rot6(ref_next, j);
        let b = rot6(sim, j);
        for d in 0..6 {
            obs.push(a[d] - b[d]);
        }
    }
    // Block 4: position residual.
    for j in 0..n {
        let d = to_frame(&ref_next.joint_pos[j]) - to_frame(&sim.joint_pos[j]);
        obs.extend_from_slice(&[d.x, d.y, d.z]);
    }
    // Block 5: velocity residual.
    for j in 0..n {
        let d = inv_heading * (ref_next.lin_vel[j] - sim.lin_vel[j]);
        obs.extend_from_slice(&[d.x, d.y, d.z]);
    }
    // Block 6: angular-velocity residual (reference at the current step).
    // Angular rates are local (root: body frame), already heading-free.
    for j in 0..n {
        let d = ref_current_ang_vel[j] - sim.ang_vel[j];
        obs.extend_from_slice(&[d.x, d.y, d.z]);
    }
    Ok(DVector::from_vec(obs))
}

/// True when the simulated pose has drifted more than `threshold_m` MPJPE
/// from the reference frame.
pub fn check_termination(
    skeleton: &Skeleton,
    reference_frame: &Pose,
    state: &SimCharacterState,
    threshold_m: f64,
) -> Result<bool> {
    let pose = state.to_pose()?;
    Ok(pose_mpjpe(skeleton, &pose, reference_frame)? > threshold_m)
}

/// Default early-termination threshold, meters.
pub const TERMINATION_MPJPE_M: f64 = 0.5;
