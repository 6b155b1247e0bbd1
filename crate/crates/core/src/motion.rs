//! Poses, motion sequences, and their JSON wire format.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{MorphError, Result};
use crate::math::{canonicalize_quat, quat_from_wxyz, quat_to_wxyz, Quat, Vec3};
use crate::skeleton::Skeleton;

/// A single pose: root position plus one parent-relative rotation per
/// joint. `joint_rot[0]` is the root's world orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    pub root_pos: Vec3,
    pub joint_rot: Vec<Quat>,
}

impl Pose {
    /// Identity rotations with the root at the given position.
    pub fn rest(skeleton: &Skeleton, root_pos: Vec3) -> Pose {
        Pose {
            root_pos,
            joint_rot: vec![Quat::identity(); skeleton.len()],
        }
    }

    /// Renormalize all quaternions and flip them to the w >= 0 hemisphere.
    /// Idempotent; the rotation action is unchanged.
    pub fn canonicalize(&self) -> Result<Pose> {
        let joint_rot = self
            .joint_rot
            .iter()
            .map(|q| canonicalize_quat(q.quaternion()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Pose {
            root_pos: self.root_pos,
            joint_rot,
        })
    }

    pub fn validate(&self, skeleton: &Skeleton) -> Result<()> {
        if self.joint_rot.len() != skeleton.len() {
            return Err(MorphError::Structural(format!(
                "pose has {} joint rotations, skeleton {} has {} joints",
                self.joint_rot.len(),
                skeleton.name,
                skeleton.len()
            )));
        }
        for (i, q) in self.joint_rot.iter().enumerate() {
            let norm = q.quaternion().norm();
            if (norm - 1.0).abs() > 1e-6 {
                return Err(MorphError::InvalidInput(format!(
                    "joint {i} rotation norm {norm} deviates from 1"
                )));
            }
        }
        if !self.root_pos.iter().all(|v| v.is_finite()) {
            return Err(MorphError::InvalidInput("non-finite root position".into()));
        }
        Ok(())
    }
}

/// Condition tag carried by every sequence: the preset label it was
/// generated from plus the seed that drove generation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionTag {
    pub label: String,
    pub seed: u64,
}

/// A timed sequence of poses at a fixed frame rate.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionSequence {
    pub fps: u32,
    pub frames: Vec<Pose>,
    pub condition: ConditionTag,
    pub skeleton_id: String,
}

impl MotionSequence {
    pub fn new(
        fps: u32,
        frames: Vec<Pose>,
        condition: ConditionTag,
        skeleton_id: impl Into<String>,
    ) -> Result<Self> {
        let seq = MotionSequence {
            fps,
            frames,
            condition,
            skeleton_id: skeleton_id.into(),
        };
        seq.validate_shape()?;
        Ok(seq)
    }

    fn validate_shape(&self) -> Result<()> {
        if self.frames.len() < 2 {
            return Err(MorphError::InvalidInput(format!(
                "motion sequence needs at least 2 frames, got {}",
                self.frames.len()
            )));
        }
        if !(10..=120).contains(&self.fps) {
            return Err(MorphError::InvalidInput(format!(
                "fps {} outside [10, 120]",
                self.fps
            )));
        }
        let n = self.frames[0].joint_rot.len();
        if self.frames.iter().any(|f| f.joint_rot.len() != n) {
            return Err(MorphError::Structural(
                "frames disagree on joint count".into(),
            ));
        }
        Ok(())
    }

    pub fn validate(&self, skeleton: &Skeleton) -> Result<()> {
        self.validate_shape()?;
        for f in &self.frames {
            f.validate(skeleton)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.frames.len() as f64 / self.fps as f64
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: MotionFile = serde_json::from_str(&text).map_err(|e| {
            MorphError::InvalidInput(format!("{}: {}", path.display(), e))
        })?;
        file.into_sequence()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&MotionFile::from_sequence(self))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&MotionFile::from_sequence(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MotionFile = serde_json::from_str(text)
            .map_err(|e| MorphError::InvalidInput(format!("motion json: {e}")))?;
        file.into_sequence()
    }
}

#[derive(Serialize, Deserialize)]
struct MotionFile {
    version: u32,
    fps: u32,
    condition: ConditionTag,
    skeleton: String,
    frames: Vec<FrameRecord>,
}

#[derive(Serialize, Deserialize)]
struct FrameRecord {
    root_pos: [f64; 3],
    joint_rot: Vec<[f64; 4]>,
}

impl MotionFile {
    fn into_sequence(self) -> Result<MotionSequence> {
        if self.version != 1 {
            return Err(MorphError::InvalidInput(format!(
                "unsupported motion file version {}",
                self.version
            )));
        }
        let frames = self
            .frames
            .into_iter()
            .map(|f| {
                let joint_rot = f
                    .joint_rot
                    .iter()
                    .map(quat_from_wxyz)
                    .collect::<Result<Vec<_>>>()?;
                Ok(Pose {
                    root_pos: Vec3::new(f.root_pos[0], f.root_pos[1], f.root_pos[2]),
                    joint_rot,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        MotionSequence::new(self.fps, frames, self.condition, self.skeleton)
    }

    fn from_sequence(seq: &MotionSequence) -> Self {
        MotionFile {
            version: 1,
            fps: seq.fps,
            condition: seq.condition.clone(),
            skeleton: seq.skeleton_id.clone(),
            frames: seq
                .frames
                .iter()
                .map(|f| FrameRecord {
                    root_pos: [f.root_pos.x, f.root_pos.y, f.root_pos.z],
                    joint_rot: f.joint_rot.iter().map(quat_to_wxyz).collect(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::default_humanoid;
    use nalgebra::Vector3;

    fn static_seq(frames: usize) -> MotionSequence {
        let skel = default_humanoid();
        let pose = Pose::rest(&skel, Vec3::new(0.0, 0.0, 0.9));
        MotionSequence::new(
            30,
            vec![pose; frames],
            ConditionTag {
                label: "stand".into(),
                seed: 0,
            },
            "humanoid13",
        )
        .unwrap()
    }

    #[test]
    fn rejects_single_frame() {
        let skel = default_humanoid();
        let pose = Pose::rest(&skel, Vec3::zeros());
        let r = MotionSequence::new(
            30,
            vec![pose],
            ConditionTag {
                label: "stand".into(),
                seed: 0,
            },
            "humanoid13",
        );
        assert!(r.is_err());
    }

    #[test]
    fn rejects_fps_out_of_range() {
        let skel = default_humanoid();
        let pose = Pose::rest(&skel, Vec3::zeros());
        let r = MotionSequence::new(
            200,
            vec![pose.clone(), pose],
            ConditionTag {
                label: "stand".into(),
                seed: 0,
            },
            "humanoid13",
        );
        assert!(r.is_err());
    }

    #[test]
    fn canonicalize_is_idempotent_and_preserves_action() {
        let skel = default_humanoid();
        let mut pose = Pose::rest(&skel, Vec3::new(0.0, 0.0, 0.9));
        // A rotation stored on the negative hemisphere.
        let q = Quat::from_scaled_axis(Vector3::new(0.1, 0.2, 0.3));
        pose.joint_rot[3] = Quat::new_unchecked(-q.quaternion());
        let once = pose.canonicalize().unwrap();
        let twice = once.canonicalize().unwrap();
        assert_eq!(once, twice);
        let v = Vector3::new(0.3, -0.4, 0.5);
        let before = pose.joint_rot[3] * v;
        let after = once.joint_rot[3] * v;
        assert!((before - after).norm() < 1e-9);
        assert!(once.joint_rot[3].w >= 0.0);
    }

    #[test]
    fn json_roundtrip_preserves_values() {
        let seq = static_seq(3);
        let text = seq.to_json().unwrap();
        let back = MotionSequence::from_json(&text).unwrap();
        assert_eq!(seq, back);
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clip.json");
        let seq = static_seq(4);
        seq.save(&path).unwrap();
        assert_eq!(MotionSequence::load(&path).unwrap(), seq);
    }
}
