//! Physical plausibility metrics: Penetrate, Float, Skate, PFC, and the
//! imitation failure rate aggregate.
//!
//! Distances are reported in millimeters; PFC is dimensionless. Ground
//! contact of a body point means its collision-sphere bottom is within
//! `contact_height` of the ground plane.

use serde::{Deserialize, Serialize};

use crate::error::{MorphError, Result};
use crate::kinematics::{center_of_mass, derive_velocities, lowest_sphere_bottom, MotionDerivatives};
use crate::math::Vec3;
use crate::motion::MotionSequence;
use crate::skeleton::Skeleton;

/// Thresholds classifying a foot as "in contact".
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ContactParams {
    /// Sphere-bottom height below which a point counts as grounded, mm.
    pub contact_height_mm: f64,
    /// Foot speed below which a grounded foot counts as planted, m/s.
    pub contact_vel_mps: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        ContactParams {
            contact_height_mm: 5.0,
            contact_vel_mps: 0.1,
        }
    }
}

impl ContactParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.contact_height_mm > 0.0) || !(self.contact_vel_mps > 0.0) {
            return Err(MorphError::InvalidInput(
                "contact thresholds must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn contact_height_m(&self) -> f64 {
        self.contact_height_mm * 1e-3
    }
}

/// Per-sequence plausibility summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlausibilityReport {
    pub penetrate_mm: f64,
    pub float_mm: f64,
    pub skate_mm: f64,
    pub pfc: f64,
}

impl PlausibilityReport {
    pub fn is_finite(&self) -> bool {
        self.penetrate_mm.is_finite()
            && self.float_mm.is_finite()
            && self.skate_mm.is_finite()
            && self.pfc.is_finite()
    }
}

/// Mean ground penetration: per frame, how far the deepest collision
/// sphere pokes below the ground, in mm (0 when nothing is below).
pub fn penetrate(skeleton: &Skeleton, seq: &MotionSequence) -> Result<f64> {
    let d = derive_velocities(skeleton, seq)?;
    Ok(penetrate_from_derivs(skeleton, &d))
}

pub fn penetrate_from_derivs(skeleton: &Skeleton, d: &MotionDerivatives) -> f64 {
    let mut total = 0.0;
    for frame in &d.joint_pos {
        let low = lowest_sphere_bottom(skeleton, frame);
        total += (-low).max(0.0);
    }
    total / d.frame_count() as f64 * 1000.0
}

/// Mean floating height: per frame, how far the lowest collision sphere
/// hovers above the contact tolerance, in mm (0 for grounded frames).
pub fn float_metric(
    skeleton: &Skeleton,
    seq: &MotionSequence,
    contact: &ContactParams,
) -> Result<f64> {
    contact.validate()?;
    let d = derive_velocities(skeleton, seq)?;
    Ok(float_from_derivs(skeleton, &d, contact))
}

pub fn float_from_derivs(skeleton: &Skeleton, d: &MotionDerivatives, contact: &ContactParams) -> f64 {
    let h = contact.contact_height_m();
    let mut total = 0.0;
    for frame in &d.joint_pos {
        let low = lowest_sphere_bottom(skeleton, frame);
        total += (low - h).max(0.0);
    }
    total / d.frame_count() as f64 * 1000.0
}

/// Mean foot slide during contact: over all (foot, frame) pairs where the
/// foot sphere bottom stays within the contact tolerance across two
/// consecutive frames, the horizontal displacement per frame in mm.
/// Returns 0 when no contact pair exists.
pub fn skate(skeleton: &Skeleton, seq: &MotionSequence, contact: &ContactParams) -> Result<f64> {
    contact.validate()?;
    if seq.len() < 2 {
        return Err(MorphError::InvalidInput("skate needs at least 2 frames".into()));
    }
    let d = derive_velocities(skeleton, seq)?;
    Ok(skate_from_derivs(skeleton, &d, contact))
}

pub fn skate_from_derivs(skeleton: &Skeleton, d: &MotionDerivatives, contact: &ContactParams) -> f64 {
    let h = contact.contact_height_m();
    let mut total = 0.0;
    let mut events = 0usize;
    for &foot in skeleton.foot_indices() {
        let radius = skeleton.joints()[foot].collision_radius;
        for l in 1..d.frame_count() {
            let b_now = d.joint_pos[l][foot].z - radius;
            let b_prev = d.joint_pos[l - 1][foot].z - radius;
            if b_now <= h && b_prev <= h {
                let delta = d.joint_pos[l][foot] - d.joint_pos[l - 1][foot];
                total += (delta.x * delta.x + delta.y * delta.y).sqrt() * 1000.0;
                events += 1;
            }
        }
    }
    if events == 0 {
        0.0
    } else {
        total / events as f64
    }
}

/// Physical foot contact score. Per interior frame the score is the
/// product of the center-of-mass acceleration magnitude (downward vertical
/// component clamped to zero, since only upward or horizontal acceleration
/// demands ground support) and both foot speeds; the mean is normalized by
/// the largest clamped acceleration magnitude. Zero means every
/// acceleration was explained by a planted foot.
pub fn pfc(skeleton: &Skeleton, seq: &MotionSequence) -> Result<f64> {
    if seq.len() < 3 {
        return Err(MorphError::InvalidInput(
            "pfc needs at least 3 frames for accelerations".into(),
        ));
    }
    let d = derive_velocities(skeleton, seq)?;
    Ok(pfc_from_derivs(skeleton, &d, seq.fps as f64))
}

pub fn pfc_from_derivs(skeleton: &Skeleton, d: &MotionDerivatives, fps: f64) -> f64 {
    let feet = skeleton.foot_indices();
    let coms: Vec<Vec3> = d
        .joint_pos
        .iter()
        .map(|frame| center_of_mass(skeleton, frame))
        .collect();
    let n = d.frame_count();
    let mut scores = Vec::with_capacity(n.saturating_sub(2));
    let mut max_acc: f64 = 0.0;
    for i in 1..n - 1 {
        let mut acc = (coms[i + 1] - coms[i] * 2.0 + coms[i - 1]) * fps * fps;
        if acc.z < 0.0 {
            acc.z = 0.0;
        }
        let a = acc.norm();
        max_acc = max_acc.max(a);
        // Product of both foot speeds: penalized only when *neither* foot
        // is still while the body accelerates.
        let mut foot_speed_product = 1.0;
        for &f in feet {
            foot_speed_product *= d.lin_vel[i][f].norm();
        }
        scores.push(a * foot_speed_product);
    }
    if max_acc <= 0.0 || scores.is_empty() {
        return 0.0;
    }
    scores.iter().sum::<f64>() / scores.len() as f64 / max_acc
}

/// Full plausibility report for one sequence.
pub fn plausibility_report(
    skeleton: &Skeleton,
    seq: &MotionSequence,
    contact: &ContactParams,
) -> Result<PlausibilityReport> {
    contact.validate()?;
    let d = derive_velocities(skeleton, seq)?;
    Ok(PlausibilityReport {
        penetrate_mm: penetrate_from_derivs(skeleton, &d),
        float_mm: float_from_derivs(skeleton, &d, contact),
        skate_mm: skate_from_derivs(skeleton, &d, contact),
        pfc: if seq.len() >= 3 {
            pfc_from_derivs(skeleton, &d, seq.fps as f64)
        } else {
            0.0
        },
    })
}

/// Imitation failure rate: the fraction of rejected selection decisions.
/// `true` entries mean the refined motion was rejected.
pub fn aggregate_ifr(rejected: &[bool]) -> Result<f64> {
    if rejected.is_empty() {
        return Err(MorphError::InvalidInput(
            "cannot aggregate IFR over an empty list".into(),
        ));
    }
    let failures = rejected.iter().filter(|&&r| r).count();
    Ok(failures as f64 / rejected.len() as f64)
}
