use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::camera::CameraTrack;
use crate::data::{PointMap, PointMapSequence};
use crate::geometry::Vec3;
use crate::math::{cos, rad};

/// Per-pixel unit normals for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalMap {
    pub width: usize,
    pub height: usize,
    pub normals: Vec<Vec3>,
    pub valid: Vec<bool>,
}

impl NormalMap {
    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalParams {
    /// Pixel offset of the finite-difference stencil.
    pub step: usize,
    /// Forward and backward tangents along an axis must agree within this
    /// angle (degrees); otherwise the stencil straddles a crease or a depth
    /// edge and the pixel is marked invalid.
    pub max_tangent_angle_deg: f64,
    /// Same, for the ratio of forward to backward tangent lengths.
    pub max_tangent_ratio: f64,
}

impl Default for NormalParams {
    fn default() -> Self {
        Self {
            step: 2,
            max_tangent_angle_deg: 45.0,
            max_tangent_ratio: 3.0,
        }
    }
}

pub fn estimate_normals(points: &PointMapSequence, cams: &CameraTrack, params: &NormalParams) -> Vec<NormalMap> {
    points
        .frames
        .iter()
        .enumerate()
        .map(|(t, f)| estimate_frame_normals(f, cams.center(t), params))
        .collect()
}

/// Finite-difference normals of one organized point map, oriented toward
/// `camera_center`.
///
/// Tangents are central differences at interior pixels and one-sided at the
/// borders. A pixel is invalid if it or any stencil neighbor is unusable.
pub fn estimate_frame_normals(frame: &PointMap, camera_center: Vec3, params: &NormalParams) -> NormalMap {
    let (w, h) = (frame.width, frame.height);
    let s = params.step.max(1);
    let min_cos = cos(rad(params.max_tangent_angle_deg));
    let mut normals = vec![Vec3::ZERO; w * h];
    let mut valid = vec![false; w * h];
    let usable = |r: usize, c: usize| frame.usable(r * w + c);
    let at = |r: usize, c: usize| frame.points[r * w + c];

    // Tangent along one axis; `None` when a stencil pixel is missing or the
    // two one-sided differences disagree.
    let tangent = |before: Option<(usize, usize)>, center: (usize, usize), after: Option<(usize, usize)>| -> Option<Vec3> {
        let p = at(center.0, center.1);
        match (before, after) {
            (Some(b), Some(a)) => {
                if !usable(b.0, b.1) || !usable(a.0, a.1) {
                    return None;
                }
                let fwd = at(a.0, a.1) - p;
                let bwd = p - at(b.0, b.1);
                let (lf, lb) = (fwd.norm(), bwd.norm());
                if lf <= 0.0 || lb <= 0.0 {
                    return None;
                }
                if fwd.dot(bwd) < min_cos * lf * lb {
                    return None;
                }
                if lf > params.max_tangent_ratio * lb || lb > params.max_tangent_ratio * lf {
                    return None;
                }
                Some(at(a.0, a.1) - at(b.0, b.1))
            }
            (None, Some(a)) => usable(a.0, a.1).then(|| at(a.0, a.1) - p),
            (Some(b), None) => usable(b.0, b.1).then(|| p - at(b.0, b.1)),
            (None, None) => None,
        }
    };

    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if !frame.usable(i) {
                continue;
            }
            let left = (c >= s).then(|| (r, c - s));
            let right = (c + s < w).then_some((r, c + s));
            let up = (r >= s).then(|| (r - s, c));
            let down = (r + s < h).then_some((r + s, c));
            let Some(tu) = tangent(left, (r, c), right) else {
                continue;
            };
            let Some(tv) = tangent(up, (r, c), down) else {
                continue;
            };
            let Some(mut n) = tu.cross(tv).try_normalize() else {
                continue;
            };
            if n.dot(camera_center - frame.points[i]) < 0.0 {
                n = -n;
            }
            normals[i] = n;
            valid[i] = true;
        }
    }
    NormalMap {
        width: w,
        height: h,
        normals,
        valid,
    }
}
