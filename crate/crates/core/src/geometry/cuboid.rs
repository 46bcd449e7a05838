use serde::{Deserialize, Serialize};

use super::{Mat3, UnitQuat, Vec3};
use crate::error::{Error, Result};

/// Minimum box thickness along the plane normal, in meters.
pub const DEFAULT_THICKNESS: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Fitted to observed scene points.
    Fitted,
    /// Hallucinated from human-scene contact points.
    ContactCompleted,
}

/// An oriented box standing in for a thin planar surface patch.
///
/// `rotation` has columns `[x, y, n]`: the in-plane axes and the extrusion
/// normal. `extents` are full side lengths `[S_x, S_y, S_z]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarPrimitive {
    pub rotation: Mat3,
    pub center: Vec3,
    pub extents: Vec3,
    pub provenance: Provenance,
}

impl PlanarPrimitive {
    pub fn new(rotation: Mat3, center: Vec3, extents: Vec3, provenance: Provenance) -> Result<Self> {
        if !center.is_finite() || !extents.is_finite() {
            return Err(Error::NonFinite("primitive center/extents"));
        }
        if (rotation.det() - 1.0).abs() > 1e-9 || rotation.orthonormality_error() > 1e-9 {
            return Err(Error::DegenerateInput("primitive rotation is not a proper rotation"));
        }
        if extents.x <= 0.0 || extents.y <= 0.0 || extents.z <= 0.0 {
            return Err(Error::DegenerateInput("primitive extents must be positive"));
        }
        if provenance == Provenance::ContactCompleted && extents.z < DEFAULT_THICKNESS {
            return Err(Error::DegenerateInput("contact primitive thinner than 0.05 m"));
        }
        Ok(Self {
            rotation,
            center,
            extents,
            provenance,
        })
    }

    /// Box from a quaternion pose and half extents.
    pub fn from_pose(
        rotation: UnitQuat,
        center: Vec3,
        half_extents: Vec3,
        provenance: Provenance,
    ) -> Result<Self> {
        Self::new(rotation.to_matrix(), center, half_extents * 2.0, provenance)
    }

    #[inline]
    pub fn half_extents(&self) -> Vec3 {
        self.extents * 0.5
    }

    #[inline]
    pub fn normal(&self) -> Vec3 {
        self.rotation.col(2)
    }

    pub fn quaternion(&self) -> UnitQuat {
        UnitQuat::from_matrix(&self.rotation)
    }

    /// Point expressed in the box frame.
    #[inline]
    pub fn to_local(&self, p: Vec3) -> Vec3 {
        self.rotation.transpose() * (p - self.center)
    }

    #[inline]
    pub fn to_world(&self, local: Vec3) -> Vec3 {
        self.rotation * local + self.center
    }

    /// The face lying on the fitted plane (opposite the extrusion direction).
    pub fn observed_face_center(&self) -> Vec3 {
        self.center - self.normal() * (0.5 * self.extents.z)
    }

    /// The 8 corners; bit `k` of the index selects the sign along axis `k`.
    pub fn corners(&self) -> [Vec3; 8] {
        let h = self.half_extents();
        let mut out = [Vec3::ZERO; 8];
        for (i, c) in out.iter_mut().enumerate() {
            let sx = if i & 1 == 0 { -h.x } else { h.x };
            let sy = if i & 2 == 0 { -h.y } else { h.y };
            let sz = if i & 4 == 0 { -h.z } else { h.z };
            *c = self.to_world(Vec3::new(sx, sy, sz));
        }
        out
    }

    /// 12 outward-facing triangles indexing into [`corners`](Self::corners).
    pub fn triangles() -> [[usize; 3]; 12] {
        [
            [0, 2, 3], [0, 3, 1], // -z
            [4, 5, 7], [4, 7, 6], // +z
            [0, 1, 5], [0, 5, 4], // -y
            [2, 6, 7], [2, 7, 3], // +y
            [0, 4, 6], [0, 6, 2], // -x
            [1, 3, 7], [1, 7, 5], // +x
        ]
    }

    pub fn surface_area(&self) -> f64 {
        let e = self.extents;
        2.0 * (e.x * e.y + e.y * e.z + e.x * e.z)
    }

    /// Applies a rigid motion `p ↦ R p + t` to the box.
    pub fn transformed(&self, r: &Mat3, t: Vec3) -> PlanarPrimitive {
        PlanarPrimitive {
            rotation: *r * self.rotation,
            center: *r * self.center + t,
            extents: self.extents,
            provenance: self.provenance,
        }
    }
}

/// Exact signed distance from `p` to the box surface; negative inside.
pub fn cuboid_signed_distance(p: Vec3, prim: &PlanarPrimitive) -> f64 {
    let q = prim.to_local(p).abs() - prim.half_extents();
    let outside = q.max(Vec3::ZERO).norm();
    let inside = q.max_element().min(0.0);
    outside + inside
}
