//! Quaternion and rotation helpers shared across the workspace.
//!
//! Conventions: quaternions are stored as `(w, x, y, z)` on the wire and
//! canonicalized to the `w >= 0` hemisphere. The up axis is +Z everywhere.

use nalgebra::{Quaternion, Rotation3, UnitQuaternion, Vector3};

use crate::error::{MorphError, Result};

pub type Vec3 = Vector3<f64>;
pub type Quat = UnitQuaternion<f64>;

/// Normalize a raw quaternion and flip it onto the canonical hemisphere.
///
/// The sign rule: flip when `w < 0`; on the `w == 0` boundary flip so the
/// first nonzero imaginary component is positive. Errors on zero norm.
pub fn canonicalize_quat(q: &Quaternion<f64>) -> Result<Quat> {
    let norm = q.norm();
    if norm < 1e-12 || !norm.is_finite() {
        return Err(MorphError::InvalidInput(format!(
            "cannot normalize quaternion with norm {norm}"
        )));
    }
    let mut u = q / norm;
    let flip = if u.w != 0.0 {
        u.w < 0.0
    } else if u.i != 0.0 {
        u.i < 0.0
    } else if u.j != 0.0 {
        u.j < 0.0
    } else {
        u.k < 0.0
    };
    if flip {
        u = -u;
    }
    Ok(UnitQuaternion::new_unchecked(u))
}

/// Rotation vector (axis * angle) of the relative rotation `from⁻¹ ∘ to`.
pub fn rotation_vector_between(from: &Quat, to: &Quat) -> Vec3 {
    (from.inverse() * to).scaled_axis()
}

/// Geodesic angle in radians between two rotations.
pub fn rotation_angle_between(a: &Quat, b: &Quat) -> f64 {
    (a.inverse() * b).angle()
}

/// 6D rotation encoding: the first two columns of the rotation matrix,
/// column-major `[r11, r21, r31, r12, r22, r32]`.
pub fn quat_to_6d(q: &Quat) -> [f64; 6] {
    let m = q.to_rotation_matrix();
    let m = m.matrix();
    [m[(0, 0)], m[(1, 0)], m[(2, 0)], m[(0, 1)], m[(1, 1)], m[(2, 1)]]
}

/// Recover a rotation from a 6D encoding by Gram-Schmidt on the two
/// encoded columns. Errors when the columns are (near) linearly dependent.
pub fn quat_from_6d(v: &[f64; 6]) -> Result<Quat> {
    let c1 = Vec3::new(v[0], v[1], v[2]);
    let c2 = Vec3::new(v[3], v[4], v[5]);
    let n1 = c1.norm();
    if n1 < 1e-9 {
        return Err(MorphError::DegenerateGeometry(
            "6d rotation: first column has zero norm".into(),
        ));
    }
    let b1 = c1 / n1;
    let c2_orth = c2 - b1 * b1.dot(&c2);
    let n2 = c2_orth.norm();
    if n2 < 1e-9 {
        return Err(MorphError::DegenerateGeometry(
            "6d rotation: columns are linearly dependent".into(),
        ));
    }
    let b2 = c2_orth / n2;
    let b3 = b1.cross(&b2);
    let rot = Rotation3::from_matrix_unchecked(nalgebra::Matrix3::from_columns(&[b1, b2, b3]));
    canonicalize_quat(UnitQuaternion::from_rotation_matrix(&rot).quaternion())
}

/// Heading of a root orientation: the rotation about +Z that aligns the
/// world x axis with the character's facing direction. Positions and
/// velocities fed to networks are expressed in this frame so features are
/// invariant to horizontal placement and facing.
pub fn heading_quat(root_rot: &Quat) -> Quat {
    let forward = root_rot * Vec3::x();
    let mut xy = Vector3::new(forward.x, forward.y, 0.0);
    if xy.norm() < 1e-6 {
        // Facing straight up or down; fall back to the body's y axis
        // rotated a quarter turn so heading stays continuous-ish.
        let side = root_rot * Vec3::y();
        xy = Vector3::new(side.y, -side.x, 0.0);
        if xy.norm() < 1e-6 {
            return Quat::identity();
        }
    }
    let angle = xy.y.atan2(xy.x);
    UnitQuaternion::from_axis_angle(&Vector3::z_axis(), angle)
}

/// Serialize a unit quaternion as `[w, x, y, z]`.
pub fn quat_to_wxyz(q: &Quat) -> [f64; 4] {
    [q.w, q.i, q.j, q.k]
}

/// Parse a `[w, x, y, z]` array into a canonical unit quaternion.
pub fn quat_from_wxyz(v: &[f64; 4]) -> Result<Quat> {
    canonicalize_quat(&Quaternion::new(v[0], v[1], v[2], v[3]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn canonicalize_flips_negative_hemisphere() {
        let q = Quaternion::new(-1.0, 0.0, 0.0, 0.0);
        let u = canonicalize_quat(&q).unwrap();
        assert_eq!(quat_to_wxyz(&u), [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn canonicalize_normalizes_then_applies_sign_rule() {
        let q = Quaternion::new(0.0, 2.0, 0.0, 0.0);
        let u = canonicalize_quat(&q).unwrap();
        assert_eq!(quat_to_wxyz(&u), [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn canonicalize_rejects_zero_quaternion() {
        let q = Quaternion::new(0.0, 0.0, 0.0, 0.0);
        assert!(canonicalize_quat(&q).is_err());
    }

    #[test]
    fn six_d_roundtrip() {
        let q = Quat::from_scaled_axis(Vec3::new(0.3, -1.1, 0.7));
        let enc = quat_to_6d(&q);
        let back = quat_from_6d(&enc).unwrap();
        assert_relative_eq!(rotation_angle_between(&q, &back), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn heading_extracts_yaw_only() {
        let yaw = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), 0.8);
        let pitch = UnitQuaternion::from_axis_angle(&Vector3::y_axis(), 0.3);
        let h = heading_quat(&(yaw * pitch));
        assert_relative_eq!(h.angle(), 0.8, epsilon = 1e-9);
        assert_relative_eq!(h.axis().unwrap().z.abs(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn rotation_vector_matches_constant_rate() {
        let a = Quat::identity();
        let b = Quat::from_scaled_axis(Vec3::new(0.0, 0.0, 0.05));
        let v = rotation_vector_between(&a, &b);
        assert_relative_eq!(v.norm(), 0.05, epsilon = 1e-12);
    }
}
