//! Simulator-side character state and the PD-target action.

use morph_core::{MorphError, Pose, Quat, Result, Skeleton, Vec3};

/// Generalized positions and velocities of the simulated character.
///
/// `joint_rot`/`joint_ang_vel` cover the actuated (non-root) joints, in
/// skeleton order starting at joint 1; the root's pose and twist live in
/// the `root_*` fields. Joint angular velocities are relative rates in the
/// joint's own (child) frame; the root angular velocity is in world frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SimCharacterState {
    pub root_pos: Vec3,
    pub root_rot: Quat,
    pub root_lin_vel: Vec3,
    /// World-frame angular velocity of the root body.
    pub root_ang_vel: Vec3,
    /// Local rotation of each non-root joint (skeleton index j ↦ entry j-1).
    pub joint_rot: Vec<Quat>,
    /// Local angular velocity of each non-root joint, rad/s.
    pub joint_ang_vel: Vec<Vec3>,
    /// PD torques applied during the most recent substep, one per non-root
    /// joint, N·m.
    pub last_torques: Vec<Vec3>,
}

impl SimCharacterState {
    pub fn joint_count(&self) -> usize {
        self.joint_rot.len() + 1
    }

    /// Root body-frame angular velocity.
    pub fn root_ang_vel_body(&self) -> Vec3 {
        self.root_rot.inverse() * self.root_ang_vel
    }

    /// Assemble the kinematic pose this state describes.
    pub fn to_pose(&self) -> Result<Pose> {
        let mut joint_rot = Vec::with_capacity(self.joint_rot.len() + 1);
        joint_rot.push(self.root_rot);
        joint_rot.extend(self.joint_rot.iter().copied());
        let pose = Pose {
            root_pos: self.root_pos,
            joint_rot,
        };
        pose.canonicalize()
    }

    pub fn is_finite(&self) -> bool {
        let vecs_finite = self.root_pos.iter().all(|v| v.is_finite())
            && self.root_lin_vel.iter().all(|v| v.is_finite())
            && self.root_ang_vel.iter().all(|v| v.is_finite());
        let quats_finite = self.root_rot.quaternion().coords.iter().all(|v| v.is_finite())
            && self
                .joint_rot
                .iter()
                .all(|q| q.quaternion().coords.iter().all(|v| v.is_finite()));
        let rates_finite = self
            .joint_ang_vel
            .iter()
            .chain(self.last_torques.iter())
            .all(|v| v.iter().all(|x| x.is_finite()));
        vecs_finite && quats_finite && rates_finite
    }

    pub fn validate(&self, skeleton: &Skeleton) -> Result<()> {
        if self.joint_rot.len() != skeleton.len() - 1
            || self.joint_ang_vel.len() != skeleton.len() - 1
        {
            return Err(MorphError::Structural(format!(
                "state has {} joints, skeleton {} expects {}",
                self.joint_rot.len() + 1,
                skeleton.name,
                skeleton.len()
            )));
        }
        if !self.is_finite() {
            return Err(MorphError::SimulationDiverged(
                "state contains non-finite values".into(),
            ));
        }
        Ok(())
    }
}

/// PD-target action: per-joint exponential-map offsets (radians) from the
/// reference next pose. One 3-vector per skeleton joint; the root entry is
/// carried for a uniform action dimension but acts on nothing (the base is
/// unactuated).
#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub pd_targets: Vec<Vec3>,
}

impl Action {
    pub fn zeros(joint_count: usize) -> Action {
        Action {
            pd_targets: vec![Vec3::zeros(); joint_count],
        }
    }

    /// Build from a flat vector (3 entries per joint), clamping each
    /// component into [-π, π].
    pub fn from_flat(values: &[f64], joint_count: usize) -> Result<Action> {
        if values.len() != 3 * joint_count {
            return Err(MorphError::Structural(format!(
                "action length {} != 3 x {joint_count}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(MorphError::InvalidInput("non-finite action".into()));
        }
        let pd_targets = values
            .chunks_exact(3)
            .map(|c| {
                Vec3::new(
                    c[0].clamp(-std::f64::consts::PI, std::f64::consts::PI),
                    c[1].clamp(-std::f64::consts::PI, std::f64::consts::PI),
                    c[2].clamp(-std::f64::consts::PI, std::f64::consts::PI),
                )
            })
            .collect();
        Ok(Action { pd_targets })
    }

    pub fn dim(joint_count: usize) -> usize {
        3 * joint_count
    }
}
