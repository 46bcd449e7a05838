use core::ops::Mul;

use serde::{Deserialize, Serialize};

use super::{Mat3, Vec3};
use crate::error::{Error, Result};
use crate::math::{atan2, cos, sin, sqrt};

/// Unit quaternion `w + xi + yj + zk`, canonicalized to `w >= 0`.
///
/// Serialized as `[w, x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct UnitQuat {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl UnitQuat {
    pub const IDENTITY: UnitQuat = UnitQuat {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Normalizes and canonicalizes; fails on zero or non-finite input.
    /// Input already unit to within rounding is kept as is, so `new` is
    /// idempotent on its own output.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let n = sqrt(w * w + x * x + y * y + z * z);
        if !n.is_finite() || n < 1e-12 {
            return Err(Error::DegenerateInput("quaternion has zero or non-finite norm"));
        }
        if (n - 1.0).abs() <= 8.0 * f64::EPSILON {
            return Ok(Self::canonical(w, x, y, z));
        }
        Ok(Self::canonical(w / n, x / n, y / n, z / n))
    }

    fn canonical(w: f64, x: f64, y: f64, z: f64) -> Self {
        let flip = if w != 0.0 {
            w < 0.0
        } else if x != 0.0 {
            x < 0.0
        } else if y != 0.0 {
            y < 0.0
        } else {
            z < 0.0
        };
        if flip {
            Self {
                w: -w,
                x: -x,
                y: -y,
                z: -z,
            }
        } else {
            Self { w, x, y, z }
        }
    }

    /// Rotation of `angle` radians about `axis` (need not be unit length).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Self {
        let Some(a) = axis.try_normalize() else {
            return Self::IDENTITY;
        };
        let (s, c) = (sin(angle / 2.0), cos(angle / 2.0));
        Self::canonical(c, a.x * s, a.y * s, a.z * s)
    }

    pub fn rot_x(angle: f64) -> Self {
        Self::from_axis_angle(Vec3::X, angle)
    }

    pub fn rot_y(angle: f64) -> Self {
        Self::from_axis_angle(Vec3::Y, angle)
    }

    pub fn rot_z(angle: f64) -> Self {
        Self::from_axis_angle(Vec3::Z, angle)
    }

    /// From a proper rotation matrix (Shepperd's method).
    pub fn from_matrix(r: &Mat3) -> Self {
        let m = &r.m;
        let trace = m[0][0] + m[1][1] + m[2][2];
        let (w, x, y, z) = if trace > 0.0 {
            let s = sqrt(trace + 1.0) * 2.0;
            (
                0.25 * s,
                (m[2][1] - m[1][2]) / s,
                (m[0][2] - m[2][0]) / s,
                (m[1][0] - m[0][1]) / s,
            )
        } else if m[0][0] > m[1][1] && m[0][0] > m[2][2] {
            let s = sqrt(1.0 + m[0][0] - m[1][1] - m[2][2]) * 2.0;
            (
                (m[2][1] - m[1][2]) / s,
                0.25 * s,
                (m[0][1] + m[1][0]) / s,
                (m[0][2] + m[2][0]) / s,
            )
        } else if m[1][1] > m[2][2] {
            let s = sqrt(1.0 + m[1][1] - m[0][0] - m[2][2]) * 2.0;
            (
                (m[0][2] - m[2][0]) / s,
                (m[0][1] + m[1][0]) / s,
                0.25 * s,
                (m[1][2] + m[2][1]) / s,
            )
        } else {
            let s = sqrt(1.0 + m[2][2] - m[0][0] - m[1][1]) * 2.0;
            (
                (m[1][0] - m[0][1]) / s,
                (m[0][2] + m[2][0]) / s,
                (m[1][2] + m[2][1]) / s,
                0.25 * s,
            )
        };
        let n = sqrt(w * w + x * x + y * y + z * z);
        Self::canonical(w / n, x / n, y / n, z / n)
    }

    #[inline]
    pub fn w(&self) -> f64 {
        self.w
    }

    #[inline]
    pub fn xyz(&self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn inverse(&self) -> Self {
        Self::canonical(self.w, -self.x, -self.y, -self.z)
    }

    /// Rotation angle in `[0, π]`.
    pub fn angle(&self) -> f64 {
        2.0 * atan2(self.xyz().norm(), self.w.abs())
    }

    pub fn rotate(&self, v: Vec3) -> Vec3 {
        let q = self.xyz();
        let t = 2.0 * q.cross(v);
        v + self.w * t + q.cross(t)
    }

    /// Applies the inverse rotation to `v`.
    pub fn inverse_rotate(&self, v: Vec3) -> Vec3 {
        self.inverse().rotate(v)
    }

    pub fn to_matrix(&self) -> Mat3 {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        Mat3::from_rows([
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ])
    }

    /// Geodesic angle between two rotations.
    pub fn angle_to(&self, other: &UnitQuat) -> f64 {
        quat_sub(*other, *self).angle()
    }
}

impl Mul for UnitQuat {
    type Output = UnitQuat;
    /// Hamilton product; `(a * b).rotate(v) == a.rotate(b.rotate(v))`.
    fn mul(self, o: UnitQuat) -> UnitQuat {
        let (a, b) = (self, o);
        let w = a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z;
        let x = a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y;
        let y = a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x;
        let z = a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w;
        let n = sqrt(w * w + x * x + y * y + z * z);
        UnitQuat::canonical(w / n, x / n, y / n, z / n)
    }
}

impl TryFrom<[f64; 4]> for UnitQuat {
    type Error = Error;
    fn try_from(a: [f64; 4]) -> Result<Self> {
        UnitQuat::new(a[0], a[1], a[2], a[3])
    }
}

impl From<UnitQuat> for [f64; 4] {
    fn from(q: UnitQuat) -> Self {
        q.to_array()
    }
}

/// Quaternion difference `a ⊖ b`: the relative rotation `r = b⁻¹ ⊗ a`, so that
/// `b ⊗ r = a`.
pub fn quat_sub(a: UnitQuat, b: UnitQuat) -> UnitQuat {
    b.inverse() * a
}

/// Rigid transform `p ↦ R p + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Se3 {
    pub rotation: UnitQuat,
    pub translation: Vec3,
}

impl Se3 {
    pub const IDENTITY: Se3 = Se3 {
        rotation: UnitQuat::IDENTITY,
        translation: Vec3::ZERO,
    };

    pub fn new(rotation: UnitQuat, translation: Vec3) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    #[inline]
    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        self.rotation.rotate(p) + self.translation
    }

    #[inline]
    pub fn transform_vector(&self, v: Vec3) -> Vec3 {
        self.rotation.rotate(v)
    }

    pub fn inverse(&self) -> Se3 {
        let r = self.rotation.inverse();
        Se3::new(r, -r.rotate(self.translation))
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Se3) -> Se3 {
        Se3::new(
            self.rotation * other.rotation,
            self.transform_point(other.translation),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::rad;

    fn close(a: UnitQuat, b: UnitQuat, tol: f64) -> bool {
        a.to_array()
            .iter()
            .zip(b.to_array())
            .all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn new_is_idempotent_on_its_output() {
        for k in 0..200 {
            let t = k as f64 * 0.173;
            let q = UnitQuat::new(t.cos(), 0.3 * t.sin(), -0.7 * (2.0 * t).sin(), 0.2 + t.cos()).unwrap();
            let a = q.to_array();
            assert_eq!(UnitQuat::new(a[0], a[1], a[2], a[3]).unwrap(), q);
        }
    }

    #[test]
    fn quat_sub_identity() {
        let q = UnitQuat::new(0.3, -0.2, 0.9, 0.1).unwrap();
        assert!(close(quat_sub(q, q), UnitQuat::IDENTITY, 1e-12));
    }

    #[test]
    fn quat_sub_same_axis() {
        let r = quat_sub(UnitQuat::rot_z(rad(90.0)), UnitQuat::rot_z(rad(30.0)));
        assert!(close(r, UnitQuat::rot_z(rad(60.0)), 1e-12));
    }

    #[test]
    fn quat_sub_matches_matrix_oracle() {
        let a = UnitQuat::rot_x(rad(45.0)) * UnitQuat::rot_y(rad(30.0));
        let b = UnitQuat::rot_x(rad(45.0));
        let r = quat_sub(a, b);
        // oracle: R_b^T R_a as matrices
        let want = b.to_matrix().transpose() * a.to_matrix();
        let got = r.to_matrix();
        for i in 0..3 {
            for j in 0..3 {
                assert!((want.m[i][j] - got.m[i][j]).abs() < 1e-12);
            }
        }
        assert!(close(r, UnitQuat::rot_y(rad(30.0)), 1e-12));
    }

    #[test]
    fn canonical_sign() {
        let q = UnitQuat::new(-0.5, 0.5, 0.5, 0.5).unwrap();
        assert!(q.w() > 0.0);
        let q = UnitQuat::new(0.0, -1.0, 0.0, 0.0).unwrap();
        assert_eq!(q.to_array(), [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn matrix_roundtrip() {
        let q = UnitQuat::new(0.1, 0.7, -0.3, 0.6).unwrap();
        let back = UnitQuat::from_matrix(&q.to_matrix());
        assert!(close(q, back, 1e-12));
        let v = Vec3::new(0.3, -1.0, 2.0);
        let a = q.rotate(v);
        let b = q.to_matrix() * v;
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn zero_quaternion_rejected() {
        assert!(UnitQuat::new(0.0, 0.0, 0.0, 0.0).is_err());
        assert!(UnitQuat::new(f64::NAN, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn se3_inverse_roundtrip() {
        let t = Se3::new(UnitQuat::rot_y(0.4), Vec3::new(1.0, 2.0, -3.0));
        let p = Vec3::new(0.5, 0.25, 4.0);
        let back = t.inverse().transform_point(t.transform_point(p));
        assert!((back - p).norm() < 1e-12);
    }
}
