//! Reduced-coordinate dynamics of a point-mass kinematic tree.
//!
//! Each joint carries a lumped point mass at its own origin, so the mass
//! matrix comes entirely from point Jacobians (no link inertia tensors);
//! an armature term on every actuated DOF keeps it positive definite.
//! Ground contact is a penalty spring-damper with Coulomb-capped tangential
//! viscosity. Integration is semi-implicit (symplectic) Euler: velocities
//! update from accelerations at the current configuration, positions from
//! the updated velocities. That keeps the stiff contact springs from
//! pumping energy.

use nalgebra::{DMatrix, DVector};

use morph_core::{
    derive_velocities, MorphError, MotionDerivatives, MotionSequence, Quat, Result, Skeleton,
    Vec3,
};

use crate::config::SimConfig;
use crate::state::{Action, SimCharacterState};

/// World-frame kinematics of every joint for one state: position,
/// rotation, point velocity, body angular velocity.
#[derive(Debug, Clone)]
pub struct BodyKinematics {
    pub positions: Vec<Vec3>,
    pub rotations: Vec<Quat>,
    pub lin_vel: Vec<Vec3>,
    pub ang_vel_world: Vec<Vec3>,
}

/// Velocity-product (zero-joint-acceleration) point accelerations.
struct VelocityProducts {
    lin_acc: Vec<Vec3>,
}

fn kinematics_with_products(
    skeleton: &Skeleton,
    state: &SimCharacterState,
) -> (BodyKinematics, VelocityProducts) {
    let n = skeleton.len();
    let mut positions = Vec::with_capacity(n);
    let mut rotations = Vec::with_capacity(n);
    let mut lin_vel = Vec::with_capacity(n);
    let mut ang_vel = Vec::with_capacity(n);
    let mut lin_acc = Vec::with_capacity(n);
    let mut ang_acc = Vec::with_capacity(n);

    for (i, joint) in skeleton.joints().iter().enumerate() {
        match joint.parent {
            None => {
                positions.push(state.root_pos);
                rotations.push(state.root_rot);
                lin_vel.push(state.root_lin_vel);
                ang_vel.push(state.root_ang_vel);
                lin_acc.push(Vec3::zeros());
                ang_acc.push(Vec3::zeros());
            }
            Some(p) => {
                let rot = rotations[p] * state.joint_rot[i - 1];
                let r = rotations[p] * joint.offset;
                let w_parent = ang_vel[p];
                let spin = rot * state.joint_ang_vel[i - 1];
                positions.push(positions[p] + r);
                rotations.push(rot);
                lin_vel.push(lin_vel[p] + w_parent.cross(&r));
                ang_vel.push(w_parent + spin);
                lin_acc.push(
                    lin_acc[p] + ang_acc[p].cross(&r) + w_parent.cross(&w_parent.cross(&r)),
                );
                ang_acc.push(ang_acc[p] + w_parent.cross(&spin));
            }
        }
    }
    (
        BodyKinematics {
            positions,
            rotations,
            lin_vel,
            ang_vel_world: ang_vel,
        },
        VelocityProducts { lin_acc },
    )
}

/// World kinematics of a state (positions, rotations, velocities).
pub fn body_kinematics(skeleton: &Skeleton, state: &SimCharacterState) -> BodyKinematics {
    kinematics_with_products(skeleton, state).0
}

/// 3 x ndof point Jacobians, one per joint mass. DOF layout: root linear
/// (0..3), root angular (3..6), then 3 per actuated joint in skeleton
/// order.
fn point_jacobians(skeleton: &Skeleton, kin: &BodyKinematics) -> Vec<DMatrix<f64>> {
    let n = skeleton.len();
    let ndof = 6 + 3 * (n - 1);
    let mut jacobians = Vec::with_capacity(n);
    for k in 0..n {
        let mut j = DMatrix::zeros(3, ndof);
        // Root translation moves every point one-for-one.
        for d in 0..3 {
            j[(d, d)] = 1.0;
        }
        // Root rotation: e × (p_k - p_root).
        let arm_root = kin.positions[k] - kin.positions[0];
        for (c, axis) in [Vec3::x(), Vec3::y(), Vec3::z()].iter().enumerate() {
            let v = axis.cross(&arm_root);
            for d in 0..3 {
                j[(d, 3 + c)] = v[d];
            }
        }
        // Every actuated joint on the path from the root to the point's
        // parent contributes a × (p_k - p_joint) per world joint axis; a
        // joint's own rotation does not move its own point mass.
        let mut a = skeleton.joints()[k].parent;
        while let Some(idx) = a {
            if idx > 0 {
                let col0 = 6 + 3 * (idx - 1);
                let rot = kin.rotations[idx].to_rotation_matrix();
                let arm = kin.positions[k] - kin.positions[idx];
                for c in 0..3 {
                    let col = rot.matrix().column(c);
                    let axis = Vec3::new(col[0], col[1], col[2]);
                    let v = axis.cross(&arm);
                    for d in 0..3 {
                        j[(d, col0 + c)] = v[d];
                    }
                }
            }
            a = skeleton.joints()[idx].parent;
        }
        jacobians.push(j);
    }
    jacobians
}

/// Contact force on one collision sphere, world frame, or None when the
/// sphere bottom is above ground.
fn contact_force(bottom: f64, point_vel: &Vec3, config: &SimConfig) -> Option<Vec3> {
    if bottom >= 0.0 {
        return None;
    }
    let pen = -bottom;
    let normal = (config.contact_stiffness * pen - config.contact_damping * point_vel.z).max(0.0);
    let mut tangent = Vec3::new(
        -config.contact_damping * point_vel.x,
        -config.contact_damping * point_vel.y,
        0.0,
    );
    let cap = config.friction_coeff * normal;
    let t_norm = tangent.norm();
    if t_norm > cap && t_norm > 0.0 {
        tangent *= cap / t_norm;
    }
    Some(Vec3::new(tangent.x, tangent.y, normal))
}

/// PD torque toward `target` in the joint's local frame, norm-clamped to
/// the torque limit.
fn pd_torque(current: &Quat, ang_vel: &Vec3, target: &Quat, config: &SimConfig) -> Vec3 {
    let err = (current.inverse() * target).scaled_axis();
    let mut tau = err * config.pd_kp - ang_vel * config.pd_kd;
    let norm = tau.norm();
    if norm > config.torque_limit {
        tau *= config.torque_limit / norm;
    }
    tau
}

/// Initialize the character on a motion frame with reference-state
/// velocities (finite differences of the clip at that frame).
pub fn reset_to_pose(
    skeleton: &Skeleton,
    seq: &MotionSequence,
    start_frame: usize,
) -> Result<SimCharacterState> {
    let derivs = derive_velocities(skeleton, seq)?;
    reset_from_derivs(skeleton, seq, &derivs, start_frame)
}

/// [`reset_to_pose`] with precomputed derivatives.
pub fn reset_from_derivs(
    skeleton: &Skeleton,
    seq: &MotionSequence,
    derivs: &MotionDerivatives,
    start_frame: usize,
) -> Result<SimCharacterState> {
    if start_frame >= seq.len() {
        return Err(MorphError::InvalidInput(format!(
            "start frame {start_frame} out of range (clip has {} frames)",
            seq.len()
        )));
    }
    let frame = &seq.frames[start_frame];
    let root_rot = frame.joint_rot[0];
    let n = skeleton.len();
    Ok(SimCharacterState {
        root_pos: frame.root_pos,
        root_rot,
        root_lin_vel: derivs.lin_vel[start_frame][0],
        // derive_velocities yields body-frame rates; the state keeps the
        // root's in world frame.
        root_ang_vel: root_rot * derivs.ang_vel[start_frame][0],
        joint_rot: frame.joint_rot[1..].to_vec(),
        joint_ang_vel: derivs.ang_vel[start_frame][1..].to_vec(),
        last_torques: vec![Vec3::zeros(); n - 1],
    })
}

/// Advance one control step. The action's exponential-map offsets are
/// composed onto the entry joint rotations once, and the resulting
/// absolute targets are held through all substeps. Deterministic:
/// identical inputs produce bit-identical outputs.
pub fn step(
    skeleton: &Skeleton,
    state: &SimCharacterState,
    action: &Action,
    config: &SimConfig,
) -> Result<SimCharacterState> {
    if action.pd_targets.len() != skeleton.len() {
        return Err(MorphError::Structural(format!(
            "action has {} targets for {} joints",
            action.pd_targets.len(),
            skeleton.len()
        )));
    }
    let targets: Vec<Quat> = state
        .joint_rot
        .iter()
        .zip(&action.pd_targets[1..])
        .map(|(q, offset)| q * Quat::from_scaled_axis(*offset))
        .collect();
    step_toward(skeleton, state, &targets, config)
}

/// Advance one control step tracking absolute local-rotation targets
/// (what rollouts use: reference next pose composed with the policy's
/// residual offsets).
pub fn step_toward(
    skeleton: &Skeleton,
    state: &SimCharacterState,
    targets: &[Quat],
    config: &SimConfig,
) -> Result<SimCharacterState> {
    state.validate(skeleton)?;
    if targets.len() != skeleton.len() - 1 {
        return Err(MorphError::Structural(format!(
            "{} targets for {} actuated joints",
            targets.len(),
            skeleton.len() - 1
        )));
    }
    let n = skeleton.len();
    let ndof = 6 + 3 * (n - 1);
    let dt = config.substep_dt();
    let gravity = Vec3::new(0.0, 0.0, -config.gravity);

    let mut next = state.clone();
    for _ in 0..config.substeps {
        let (kin, vp) = kinematics_with_products(skeleton, &next);
        let jacobians = point_jacobians(skeleton, &kin);

        // Generalized force: Q = Σ J_kᵀ (f_ext,k - m_k a_vp,k) + joint torques.
        let mut q_force = DVector::zeros(ndof);
        for k in 0..n {
            let mass = skeleton.joints()[k].mass;
            let mut force = gravity * mass;
            let bottom = kin.positions[k].z - skeleton.joints()[k].collision_radius;
            if let Some(fc) = contact_force(bottom, &kin.lin_vel[k], config) {
                force += fc;
            }
            let effective = force - vp.lin_acc[k] * mass;
            q_force.gemv_tr(1.0, &jacobians[k], &effective, 1.0);
        }
        let mut torques = Vec::with_capacity(n - 1);
        for j in 1..n {
            let tau = pd_torque(
                &next.joint_rot[j - 1],
                &next.joint_ang_vel[j - 1],
                &targets[j - 1],
                config,
            );
            let col0 = 6 + 3 * (j - 1);
            for d in 0..3 {
                q_force[col0 + d] += tau[d];
            }
            torques.push(tau);
        }

        // M = Σ m_k J_kᵀ J_k, plus armature on actuated DOFs.
        let mut mass_matrix = DMatrix::zeros(ndof, ndof);
        for k in 0..n {
            mass_matrix.gemm_tr(skeleton.joints()[k].mass, &jacobians[k], &jacobians[k], 1.0);
        }
        for d in 6..ndof {
            mass_matrix[(d, d)] += config.armature;
        }

        let accel = solve_spd(mass_matrix, &q_force)?;

        // v ← v + dt·a, then x ← x + dt·v_new.
        let lin_acc = Vec3::new(accel[0], accel[1], accel[2]);
        let ang_acc = Vec3::new(accel[3], accel[4], accel[5]);
        next.root_lin_vel += lin_acc * dt;
        next.root_ang_vel += ang_acc * dt;
        next.root_pos += next.root_lin_vel * dt;
        next.root_rot = Quat::from_scaled_axis(next.root_ang_vel * dt) * next.root_rot;
        for j in 0..n - 1 {
            let a = Vec3::new(accel[6 + 3 * j], accel[7 + 3 * j], accel[8 + 3 * j]);
            next.joint_ang_vel[j] += a * dt;
            next.joint_rot[j] *= Quat::from_scaled_axis(next.joint_ang_vel[j] * dt);
        }
        renormalize(&mut next);
        next.last_torques = torques;
        if !next.is_finite() {
            return Err(MorphError::SimulationDiverged(
                "non-finite state after integration".into(),
            ));
        }
    }
    Ok(next)
}

fn renormalize(state: &mut SimCharacterState) {
    state.root_rot = Quat::new_normalize(*state.root_rot.quaternion());
    for q in &mut state.joint_rot {
        *q = Quat::new_normalize(*q.quaternion());
    }
}

fn solve_spd(mut m: DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let dim = m.nrows();
    let mut jitter = 0.0f64;
    for _ in 0..8 {
        if jitter > 0.0 {
            for d in 0..dim {
                m[(d, d)] += jitter;
            }
        }
        if let Some(chol) = m.clone().cholesky() {
            return Ok(chol.solve(rhs));
        }
        jitter = if jitter == 0.0 { 1e-10 } else { jitter * 100.0 };
    }
    Err(MorphError::SimulationDiverged(
        "mass matrix is not positive definite".into(),
    ))
}

/// Total mechanical energy: point-mass kinetic + armature kinetic +
/// gravitational potential + contact-spring elastic energy. With damped
/// contacts this is non-increasing over time.
pub fn mechanical_energy(
    skeleton: &Skeleton,
    state: &SimCharacterState,
    config: &SimConfig,
) -> f64 {
    let kin = body_kinematics(skeleton, state);
    let mut e = 0.0;
    for (k, joint) in skeleton.joints().iter().enumerate() {
        e += 0.5 * joint.mass * kin.lin_vel[k].norm_squared();
        e += joint.mass * config.gravity * kin.positions[k].z;
        let bottom = kin.positions[k].z - joint.collision_radius;
        if bottom < 0.0 {
            e += 0.5 * config.contact_stiffness * bottom * bottom;
        }
    }
    for w in &state.joint_ang_vel {
        e += 0.5 * config.armature * w.norm_squared();
    }
    e
}

/// Deepest current sphere penetration, meters (0 when airborne).
pub fn max_penetration(skeleton: &Skeleton, state: &SimCharacterState) -> f64 {
    let kin = body_kinematics(skeleton, state);
    skeleton
        .joints()
        .iter()
        .enumerate()
        .map(|(k, j)| -(kin.positions[k].z - j.collision_radius))
        .fold(0.0f64, f64::max)
}
