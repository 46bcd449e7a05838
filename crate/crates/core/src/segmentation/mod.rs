//! Per-frame planar segmentation: finite-difference normals, spherical
//! k-means on normals, and DBSCAN splitting of each normal cluster into
//! spatially connected segments.

mod dbscan;
mod kmeans;
mod normals;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use dbscan::dbscan;
pub use kmeans::{cluster_normals, spherical_kmeans, KMeansParams};
pub use normals::{estimate_frame_normals, estimate_normals, NormalMap, NormalParams};

use crate::data::PointMap;
use crate::geometry::Vec3;

/// A spatially connected, normal-consistent set of pixels in one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub frame: usize,
    /// Row-major pixel indices, ascending.
    pub members: Vec<u32>,
    pub mean_normal: Vec3,
    pub centroid: Vec3,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpatialParams {
    /// DBSCAN radius (m).
    pub eps: f64,
    pub min_pts: usize,
    /// Segments with fewer pixels are dropped.
    pub min_segment_size: usize,
}

impl Default for SpatialParams {
    fn default() -> Self {
        Self {
            eps: 0.15,
            min_pts: 20,
            min_segment_size: 200,
        }
    }
}

impl SpatialParams {
    /// Scales the pixel-count thresholds from their 256×256 reference values.
    pub fn for_resolution(&self, width: usize, height: usize) -> SpatialParams {
        let ratio = (width * height) as f64 / (256.0 * 256.0);
        let scale = |v: usize| -> usize { crate::math::round(v as f64 * ratio).max(1.0) as usize };
        SpatialParams {
            eps: self.eps,
            min_pts: scale(self.min_pts).max(3),
            min_segment_size: scale(self.min_segment_size),
        }
    }
}

/// Splits every normal cluster of a frame into DBSCAN components.
///
/// `labels` come from [`cluster_normals`] (`0` = unlabeled). Noise pixels and
/// components smaller than `min_segment_size` are discarded. Segments are
/// ordered by normal label, then by DBSCAN cluster id.
pub fn split_spatial(
    frame_index: usize,
    frame: &PointMap,
    normals: &NormalMap,
    labels: &[u16],
    params: &SpatialParams,
) -> Vec<Segment> {
    let max_label = labels.iter().copied().max().unwrap_or(0);
    let mut out = Vec::new();
    for k in 1..=max_label {
        let pix: Vec<u32> = (0..labels.len())
            .filter(|&i| labels[i] == k && frame.usable(i))
            .map(|i| i as u32)
            .collect();
        if pix.is_empty() {
            continue;
        }
        let pts: Vec<Vec3> = pix.iter().map(|&i| frame.points[i as usize]).collect();
        let cl = dbscan(&pts, params.eps, params.min_pts);
        let nclusters = cl.iter().flatten().max().map_or(0, |m| m + 1);
        let mut buckets: Vec<Vec<u32>> = (0..nclusters).map(|_| Vec::new()).collect();
        for (&p, c) in pix.iter().zip(&cl) {
            if let Some(c) = c {
                buckets[*c].push(p);
            }
        }
        for members in buckets {
            if members.len() < params.min_segment_size.max(1) {
                continue;
            }
            let mut nsum = Vec3::ZERO;
            let mut csum = Vec3::ZERO;
            for &m in &members {
                nsum += normals.normals[m as usize];
                csum += frame.points[m as usize];
            }
            let Some(mean_normal) = nsum.try_normalize() else {
                continue;
            };
            let centroid = csum / members.len() as f64;
            out.push(Segment {
                frame: frame_index,
                members,
                mean_normal,
                centroid,
            });
        }
    }
    out
}
