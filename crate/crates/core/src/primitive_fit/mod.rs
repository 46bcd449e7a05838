//! Cuboid primitives from grouped point clouds and from stable contacts.

mod contacts;
mod ransac;
mod rect;

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use contacts::{complete_from_contacts, filter_contacts, ContactEvent, ContactParams};
pub use ransac::{ransac_plane, RansacParams};
pub use rect::{convex_hull, min_area_rect, Rect2};

use crate::error::{Error, Result};
use crate::geometry::{point_plane_distance, Mat3, PlanarPrimitive, Plane, Provenance, Vec2, Vec3, DEFAULT_THICKNESS};
use crate::math::{ceil, cos, floor, median, sin, sqrt};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitParams {
    /// Footprints whose occupancy is below this are split.
    pub fill_min: f64,
    /// Occupancy grid cell size (m).
    pub cell: f64,
    pub max_depth: usize,
    /// Parts smaller than this are not split off.
    pub min_points: usize,
    /// A split is kept only if the parts' footprints cover at most
    /// `1 - min_gain` of the parent footprint.
    pub min_gain: f64,
}

impl Default for SplitParams {
    fn default() -> Self {
        Self {
            fill_min: 0.75,
            cell: 0.05,
            max_depth: 3,
            min_points: 50,
            min_gain: 0.2,
        }
    }
}

/// Box whose `-n` face lies on `plane`, with in-plane axes and extents from
/// the minimum-area rectangle of the projected inliers. `n` is the plane's
/// canonical normal.
pub fn build_primitive(plane: &Plane, inliers: &[Vec3]) -> Result<PlanarPrimitive> {
    build_with_normal(plane, inliers, plane.normal(), Provenance::Fitted)
}

/// As [`build_primitive`], with the extrusion normal chosen so that it points
/// along `away` (into the supporting solid).
pub fn build_primitive_oriented(
    plane: &Plane,
    inliers: &[Vec3],
    away: Vec3,
    provenance: Provenance,
) -> Result<PlanarPrimitive> {
    let n = if plane.normal().dot(away) < 0.0 { -plane.normal() } else { plane.normal() };
    build_with_normal(plane, inliers, n, provenance)
}

fn build_with_normal(plane: &Plane, inliers: &[Vec3], n: Vec3, provenance: Provenance) -> Result<PlanarPrimitive> {
    if inliers.len() < 3 {
        return Err(Error::InsufficientPoints {
            needed: 3,
            have: inliers.len(),
        });
    }
    let u = n.any_orthonormal();
    let v = n.cross(u);
    let origin = plane.normal() * plane.offset();
    let flat: Vec<Vec2> = inliers
        .iter()
        .map(|&p| {
            let d = p - origin;
            Vec2::new(d.dot(u), d.dot(v))
        })
        .collect();
    let rect = min_area_rect(&flat)?;
    let x = u * cos(rect.angle) + v * sin(rect.angle);
    let y = n.cross(x);
    let spread = inliers
        .iter()
        .map(|&p| point_plane_distance(p, plane).abs())
        .fold(0.0, f64::max);
    let extents = Vec3::new(2.0 * rect.half.x, 2.0 * rect.half.y, (2.0 * spread).max(DEFAULT_THICKNESS));
    let face = origin + u * rect.center.x + v * rect.center.y;
    let center = face + n * (0.5 * extents.z);
    PlanarPrimitive::new(Mat3::from_cols(x, y, n), center, extents, provenance)
}

/// Fraction of occupancy-grid cells over the primitive's footprint that
/// contain at least one point.
pub fn fill_ratio(prim: &PlanarPrimitive, points: &[Vec3], cell: f64) -> f64 {
    let h = prim.half_extents();
    let nx = (ceil(2.0 * h.x / cell) as usize).max(1);
    let ny = (ceil(2.0 * h.y / cell) as usize).max(1);
    let mut occ = vec![false; nx * ny];
    for &p in points {
        let l = prim.to_local(p);
        let ix = (floor((l.x + h.x) / cell).max(0.0) as usize).min(nx - 1);
        let iy = (floor((l.y + h.y) / cell).max(0.0) as usize).min(ny - 1);
        occ[iy * nx + ix] = true;
    }
    occ.iter().filter(|&&o| o).count() as f64 / (nx * ny) as f64
}

/// Recursively splits a primitive whose footprint is poorly filled at the
/// median of its long in-plane axis, refitting each half on the same plane.
/// Splits that do not shrink the covered area by `min_gain` are undone.
pub fn split_footprint(prim: &PlanarPrimitive, inliers: &[Vec3], params: &SplitParams) -> Vec<PlanarPrimitive> {
    split_parts(prim, inliers, params, 0)
        .into_iter()
        .map(|(p, _)| p)
        .collect()
}

/// As [`split_footprint`], keeping each part's points.
pub fn split_parts(
    prim: &PlanarPrimitive,
    inliers: &[Vec3],
    params: &SplitParams,
    depth: usize,
) -> Vec<(PlanarPrimitive, Vec<Vec3>)> {
    let whole = || vec![(*prim, inliers.to_vec())];
    if depth >= params.max_depth || fill_ratio(prim, inliers, params.cell) >= params.fill_min {
        return whole();
    }
    let x = prim.rotation.col(0);
    let mut along: Vec<f64> = inliers.iter().map(|&p| (p - prim.center).dot(x)).collect();
    let Some(cut) = median(&mut along) else {
        return whole();
    };
    let (lo, hi): (Vec<Vec3>, Vec<Vec3>) = inliers.iter().partition(|&&p| (p - prim.center).dot(x) < cut);
    if lo.len() < params.min_points.max(3) || hi.len() < params.min_points.max(3) {
        return whole();
    }
    let n = prim.normal();
    let Ok(plane) = Plane::from_point_normal(prim.observed_face_center(), n) else {
        return whole();
    };
    let mut halves = Vec::new();
    for part in [lo, hi] {
        match build_with_normal(&plane, &part, n, prim.provenance) {
            Ok(p) => halves.push((p, part)),
            Err(_) => return whole(),
        }
    }
    let area = |p: &PlanarPrimitive| p.extents.x * p.extents.y;
    let covered: f64 = halves.iter().map(|(p, _)| area(p)).sum();
    if covered > (1.0 - params.min_gain) * area(prim) {
        return whole();
    }
    halves
        .into_iter()
        .flat_map(|(p, part)| split_parts(&p, &part, params, depth + 1))
        .collect()
}

/// A fitted primitive with its fit statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPrimitive {
    pub primitive: PlanarPrimitive,
    /// Source group, absent for contact-completed primitives.
    pub group: Option<usize>,
    pub inlier_count: usize,
    /// RMS distance of the inliers to the observed face plane (m).
    pub residual: f64,
}

impl FittedPrimitive {
    pub fn new(primitive: PlanarPrimitive, group: Option<usize>, points: &[Vec3]) -> Self {
        let n = primitive.normal();
        let face = primitive.observed_face_center();
        let ss: f64 = points.iter().map(|&p| {
                let d = (p - face).dot(n);
                d * d
            }).sum();
        let residual = if points.is_empty() { 0.0 } else { sqrt(ss / points.len() as f64) };
        Self {
            primitive,
            group,
            inlier_count: points.len(),
            residual,
        }
    }
}

/// RANSAC plane, box extraction and footprint splitting for one group cloud.
///
/// `facing` is the mean observed normal (pointing toward the cameras); the
/// boxes extrude the opposite way.
pub fn fit_group(
    group: usize,
    points: &[Vec3],
    facing: Vec3,
    ransac: &RansacParams,
    split: &SplitParams,
) -> Result<Vec<FittedPrimitive>> {
    if points.len() < ransac.min_points {
        return Err(Error::InsufficientPoints {
            needed: ransac.min_points,
            have: points.len(),
        });
    }
    let (plane, idx) = ransac_plane(points, ransac)?;
    if idx.len() < ransac.min_points.max(3) {
        return Err(Error::InsufficientPoints {
            needed: ransac.min_points,
            have: idx.len(),
        });
    }
    let inliers: Vec<Vec3> = idx.iter().map(|&i| points[i]).collect();
    let prim = build_primitive_oriented(&plane, &inliers, -facing, Provenance::Fitted)?;
    Ok(split_parts(&prim, &inliers, split, 0)
        .into_iter()
        .map(|(p, pts)| FittedPrimitive::new(p, Some(group), &pts))
        .collect())
}
