use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Mat3, Se3, UnitQuat, Vec2, Vec3};

/// Pinhole intrinsics. Pixel `(u, v)` is column `u`, row `v`; integer
/// coordinates are pixel centers. Camera axes: x right, y down, z forward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Intrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        if !(fx > 0.0 && fy > 0.0) || !cx.is_finite() || !cy.is_finite() {
            return Err(Error::InvalidConfig("intrinsics need positive focal lengths"));
        }
        Ok(Self { fx, fy, cx, cy })
    }

    /// Accepts an upper-triangular `K` with zero skew.
    pub fn from_matrix(k: &Mat3) -> Result<Self> {
        let m = &k.m;
        if m[1][0] != 0.0 || m[2][0] != 0.0 || m[2][1] != 0.0 || m[2][2] != 1.0 {
            return Err(Error::InvalidConfig("intrinsics matrix must be upper triangular with K[2][2] = 1"));
        }
        Self::new(m[0][0], m[1][1], m[0][2], m[1][2])
    }

    pub fn to_matrix(&self) -> Mat3 {
        Mat3::from_rows([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])
    }

    /// Camera-frame ray through pixel `(u, v)`, with unit z component.
    #[inline]
    pub fn ray(&self, u: f64, v: f64) -> Vec3 {
        Vec3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0)
    }

    /// Projects a camera-frame point; `None` behind the camera.
    #[inline]
    pub fn project(&self, p: Vec3) -> Option<Vec2> {
        if p.z <= 1e-12 {
            return None;
        }
        Some(Vec2::new(self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy))
    }
}

/// Intrinsics plus one camera-to-world pose per frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraTrack {
    pub intrinsics: Intrinsics,
    pub poses: Vec<Se3>,
}

impl CameraTrack {
    pub fn center(&self, t: usize) -> Vec3 {
        self.poses[t].translation
    }

    /// Depth along the optical axis of world point `p` in frame `t`.
    #[inline]
    pub fn depth(&self, t: usize, p: Vec3) -> f64 {
        self.poses[t].inverse().transform_point(p).z
    }

    /// Scales camera translations, as when the whole reconstruction is rescaled.
    pub fn scaled(&self, s: f64) -> CameraTrack {
        CameraTrack {
            intrinsics: self.intrinsics,
            poses: self
                .poses
                .iter()
                .map(|p| Se3::new(p.rotation, p.translation * s))
                .collect(),
        }
    }

    /// Camera at `eye` looking at `target`, with world `+z` as up.
    pub fn look_at(eye: Vec3, target: Vec3) -> Se3 {
        let forward = (target - eye).try_normalize().unwrap_or(Vec3::Y);
        let right = forward
            .cross(Vec3::Z)
            .try_normalize()
            .unwrap_or_else(|| forward.any_orthonormal());
        let down = forward.cross(right);
        Se3::new(UnitQuat::from_matrix(&Mat3::from_cols(right, down, forward)), eye)
    }
}
