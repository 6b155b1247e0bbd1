//! Joint-tree skeleton with offsets, masses, and collision spheres.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{MorphError, Result};
use crate::math::Vec3;

/// One joint of the kinematic tree. `offset` is the joint position in its
/// parent's frame at zero rotation; the joint carries a lumped point mass
/// and a collision sphere centered at the joint position.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    /// Parent joint index, `None` for the root.
    pub parent: Option<usize>,
    pub offset: Vec3,
    pub mass: f64,
    pub collision_radius: f64,
}

/// Topologically sorted joint tree (parent index < child index) with foot
/// and pelvis designations. Up axis is +Z, ground plane z = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    pub name: String,
    joints: Vec<Joint>,
    foot_indices: Vec<usize>,
    pelvis_index: usize,
}

impl Skeleton {
    pub fn new(
        name: impl Into<String>,
        joints: Vec<Joint>,
        foot_indices: Vec<usize>,
        pelvis_index: usize,
    ) -> Result<Self> {
        let s = Skeleton {
            name: name.into(),
            joints,
            foot_indices,
            pelvis_index,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if self.joints.is_empty() {
            return Err(MorphError::InvalidInput("skeleton has no joints".into()));
        }
        let mut roots = 0usize;
        for (i, j) in self.joints.iter().enumerate() {
            match j.parent {
                None => roots += 1,
                Some(p) => {
                    if p >= i {
                        return Err(MorphError::InvalidInput(format!(
                            "joint {} ({}) has parent {} >= its own index",
                            i, j.name, p
                        )));
                    }
                }
            }
            if !(j.mass > 0.0) {
                return Err(MorphError::InvalidInput(format!(
                    "joint {} has non-positive mass {}",
                    j.name, j.mass
                )));
            }
            if !(j.collision_radius > 0.0) {
                return Err(MorphError::InvalidInput(format!(
                    "joint {} has non-positive collision radius {}",
                    j.name, j.collision_radius
                )));
            }
        }
        if roots != 1 || self.joints[0].parent.is_some() {
            return Err(MorphError::InvalidInput(format!(
                "skeleton must have exactly one root at index 0, found {roots} root(s)"
            )));
        }
        if self.foot_indices.is_empty() {
            return Err(MorphError::InvalidInput("foot_indices is empty".into()));
        }
        for &f in &self.foot_indices {
            if f >= self.joints.len() {
                return Err(MorphError::InvalidInput(format!(
                    "foot index {f} out of range"
                )));
            }
        }
        if self.pelvis_index >= self.joints.len() {
            return Err(MorphError::InvalidInput(format!(
                "pelvis index {} out of range",
                self.pelvis_index
            )));
        }
        Ok(())
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }

    pub fn foot_indices(&self) -> &[usize] {
        &self.foot_indices
    }

    pub fn pelvis_index(&self) -> usize {
        self.pelvis_index
    }

    pub fn total_mass(&self) -> f64 {
        self.joints.iter().map(|j| j.mass).sum()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: SkeletonFile = serde_json::from_str(&text).map_err(|e| {
            MorphError::InvalidInput(format!("{}: {}", path.display(), e))
        })?;
        file.into_skeleton()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = SkeletonFile::from_skeleton(self);
        let text = serde_json::to_string_pretty(&file)?;
        std::fs::write(path, text)?;
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct SkeletonFile {
    version: u32,
    name: String,
    joints: Vec<JointRecord>,
    feet: Vec<usize>,
    pelvis: usize,
}

#[derive(Serialize, Deserialize)]
struct JointRecord {
    name: String,
    parent: i64,
    offset: [f64; 3],
    mass: f64,
    collision_radius: f64,
}

impl SkeletonFile {
    fn into_skeleton(self) -> Result<Skeleton> {
        if self.version != 1 {
            return Err(MorphError::InvalidInput(format!(
                "unsupported skeleton file version {}",
                self.version
            )));
        }
        let joints = self
            .joints
            .into_iter()
            .map(|r| {
                let parent = if r.parent < 0 {
                    None
                } else {
                    Some(r.parent as usize)
                };
                Joint {
                    name: r.name,
                    parent,
                    offset: Vec3::new(r.offset[0], r.offset[1], r.offset[2]),
                    mass: r.mass,
                    collision_radius: r.collision_radius,
                }
            })
            .collect();
        Skeleton::new(self.name, joints, self.feet, self.pelvis)
    }

    fn from_skeleton(s: &Skeleton) -> Self {
        SkeletonFile {
            version: 1,
            name: s.name.clone(),
            joints: s
                .joints
                .iter()
                .map(|j| JointRecord {
                    name: j.name.clone(),
                    parent: j.parent.map_or(-1, |p| p as i64),
                    offset: [j.offset.x, j.offset.y, j.offset.z],
                    mass: j.mass,
                    collision_radius: j.collision_radius,
                })
                .collect(),
            feet: s.foot_indices.clone(),
            pelvis: s.pelvis_index,
        }
    }
}

/// The default 13-joint humanoid: pelvis, spine, head, two 3-joint legs,
/// and two 2-joint arms. Roughly 1.6 m tall, 16.5 kg, feet at the ankles.
/// Sized so the rest pose with the root at z = 0.9 touches the ground
/// exactly (ankle sphere bottoms at z = 0).
pub fn default_humanoid() -> Skeleton {
    let j = |name: &str, parent: i64, offset: [f64; 3], mass: f64, radius: f64| Joint {
        name: name.to_string(),
        parent: if parent < 0 { None } else { Some(parent as usize) },
        offset: Vec3::new(offset[0], offset[1], offset[2]),
        mass,
        collision_radius: radius,
    };
    let joints = vec![
        j("pelvis", -1, [0.0, 0.0, 0.0], 3.0, 0.09),
        j("spine", 0, [0.0, 0.0, 0.25], 3.0, 0.10),
        j("head", 1, [0.0, 0.0, 0.30], 1.5, 0.08),
        j("l_hip", 0, [0.0, 0.10, -0.05], 1.5, 0.07),
        j("l_knee", 3, [0.0, 0.0, -0.40], 1.0, 0.06),
        j("l_ankle", 4, [0.0, 0.0, -0.40], 0.5, 0.05),
        j("r_hip", 0, [0.0, -0.10, -0.05], 1.5, 0.07),
        j("r_knee", 6, [0.0, 0.0, -0.40], 1.0, 0.06),
        j("r_ankle", 7, [0.0, 0.0, -0.40], 0.5, 0.05),
        j("l_shoulder", 1, [0.0, 0.20, 0.05], 1.0, 0.06),
        j("l_elbow", 9, [0.0, 0.0, -0.25], 0.5, 0.05),
        j("r_shoulder", 1, [0.0, -0.20, 0.05], 1.0, 0.06),
        j("r_elbow", 11, [0.0, 0.0, -0.25], 0.5, 0.05),
    ];
    Skeleton::new("humanoid13", joints, vec![5, 8], 0).expect("default skeleton is valid")
}

/// Root height at which the default humanoid's rest pose rests exactly on
/// the ground.
pub const DEFAULT_REST_ROOT_HEIGHT: f64 = 0.9;

/// Resolve a skeleton by its id as referenced from motion files. Only the
/// built-in `humanoid13` is registered.
pub fn skeleton_by_id(id: &str) -> Result<Skeleton> {
    match id {
        "humanoid13" => Ok(default_humanoid()),
        other => Err(MorphError::InvalidInput(format!(
            "unknown skeleton id '{other}' (registered: humanoid13)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_humanoid_is_valid_and_grounded() {
        let s = default_humanoid();
        assert_eq!(s.len(), 13);
        assert_eq!(s.foot_indices(), &[5, 8]);
        assert_eq!(s.pelvis_index(), 0);
        // Ankle chain: -0.05 - 0.40 - 0.40 = -0.85 from root; sphere r = 0.05.
        let drop: f64 = -0.05 - 0.40 - 0.40;
        assert!((DEFAULT_REST_ROOT_HEIGHT + drop - 0.05).abs() < 1e-12);
        assert!((s.total_mass() - 16.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_unsorted_parent() {
        let joints = vec![
            Joint {
                name: "a".into(),
                parent: None,
                offset: Vec3::zeros(),
                mass: 1.0,
                collision_radius: 0.1,
            },
            Joint {
                name: "b".into(),
                parent: Some(1),
                offset: Vec3::zeros(),
                mass: 1.0,
                collision_radius: 0.1,
            },
        ];
        assert!(Skeleton::new("bad", joints, vec![0], 0).is_err());
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("skel.json");
        let s = default_humanoid();
        s.save(&path).unwrap();
        let loaded = Skeleton::load(&path).unwrap();
        assert_eq!(s, loaded);
    }

    #[test]
    fn unknown_id_is_an_input_error() {
        assert!(skeleton_by_id("nope").is_err());
        assert!(skeleton_by_id("humanoid13").is_ok());
    }
}
