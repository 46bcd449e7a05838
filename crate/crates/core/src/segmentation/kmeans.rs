use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::NormalMap;
use crate::association::UnionFind;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::math::{cos, rad};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansParams {
    pub k: usize,
    pub max_iter: usize,
    /// Converged once no centroid moves more than this.
    pub tol: f64,
    pub seed: u64,
    /// After convergence, clusters whose centroids are closer than this angle
    /// (degrees) are merged. Zero disables merging.
    pub merge_angle_deg: f64,
    /// Normals farther than this (degrees) from their centroid stay
    /// unlabeled; 180 keeps everything.
    pub max_angle_deg: f64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            k: 6,
            max_iter: 100,
            tol: 1e-6,
            seed: 0,
            merge_angle_deg: 20.0,
            max_angle_deg: 30.0,
        }
    }
}

/// Spherical k-means over the valid normals of one frame.
///
/// Returns a label per pixel: `0` for invalid pixels and for normals more
/// than `max_angle_deg` from their centroid, `1..=K'` otherwise,
/// where `K' <= K` (fewer when the data has fewer distinct directions or
/// centroids were merged). Seeding is farthest-point from a seeded random
/// start, so the result is deterministic.
pub fn cluster_normals(normals: &NormalMap, params: &KMeansParams) -> Result<Vec<u16>> {
    let idx: Vec<usize> = (0..normals.normals.len()).filter(|&i| normals.valid[i]).collect();
    if params.k == 0 || idx.len() < params.k {
        return Err(Error::InsufficientPoints {
            needed: params.k.max(1),
            have: idx.len(),
        });
    }
    let data: Vec<Vec3> = idx.iter().map(|&i| normals.normals[i]).collect();
    let (centroids, assign) = spherical_kmeans(&data, params);
    let merged = merge_close(&centroids, params.merge_angle_deg);
    let min_dot = if params.max_angle_deg >= 180.0 { f64::NEG_INFINITY } else { cos(rad(params.max_angle_deg)) };
    let mut labels = vec![0u16; normals.normals.len()];
    for ((&i, &a), d) in idx.iter().zip(&assign).zip(&data) {
        if d.dot(centroids[a]) >= min_dot {
            labels[i] = merged[a];
        }
    }
    Ok(labels)
}

/// Returns centroids and the centroid index of each datum.
pub fn spherical_kmeans(data: &[Vec3], params: &KMeansParams) -> (Vec<Vec3>, Vec<usize>) {
    let mut centroids = farthest_point_seeds(data, params.k, params.seed);
    let mut assign = vec![0usize; data.len()];
    for _ in 0..params.max_iter.max(1) {
        for (a, d) in assign.iter_mut().zip(data) {
            *a = nearest(&centroids, *d);
        }
        let mut sums = vec![Vec3::ZERO; centroids.len()];
        for (&a, d) in assign.iter().zip(data) {
            sums[a] += *d;
        }
        let mut moved: f64 = 0.0;
        for (c, s) in centroids.iter_mut().zip(&sums) {
            if let Some(n) = s.try_normalize() {
                moved = moved.max((n - *c).norm());
                *c = n;
            }
        }
        if moved < params.tol {
            break;
        }
    }
    for (a, d) in assign.iter_mut().zip(data) {
        *a = nearest(&centroids, *d);
    }
    (centroids, assign)
}

#[inline]
fn nearest(centroids: &[Vec3], d: Vec3) -> usize {
    let mut best = 0;
    let mut best_dot = f64::NEG_INFINITY;
    for (j, c) in centroids.iter().enumerate() {
        let dot = c.dot(d);
        if dot > best_dot {
            best_dot = dot;
            best = j;
        }
    }
    best
}

fn farthest_point_seeds(data: &[Vec3], k: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = data[rng.random_range(0..data.len())];
    let mut seeds = vec![first];
    // cosine distance to the nearest seed so far
    let mut dist: Vec<f64> = data.iter().map(|d| 1.0 - d.dot(first)).collect();
    while seeds.len() < k {
        let (far, &far_d) = dist
            .iter()
            .enumerate()
            .fold((0, &f64::NEG_INFINITY), |acc, x| if *x.1 > *acc.1 { x } else { acc });
        if far_d <= 1e-12 {
            break;
        }
        let s = data[far];
        seeds.push(s);
        for (dd, d) in dist.iter_mut().zip(data) {
            *dd = dd.min(1.0 - d.dot(s));
        }
    }
    seeds
}

/// Maps centroid index to a compact 1-based label after merging centroids
/// within `angle_deg` of each other (transitively).
fn merge_close(centroids: &[Vec3], angle_deg: f64) -> Vec<u16> {
    let mut uf = UnionFind::new(centroids.len());
    if angle_deg > 0.0 {
        let min_dot = cos(rad(angle_deg));
        for a in 0..centroids.len() {
            for b in (a + 1)..centroids.len() {
                if centroids[a].dot(centroids[b]) >= min_dot {
                    uf.union(a, b);
                }
            }
        }
    }
    let mut root_label: Vec<Option<u16>> = vec![None; centroids.len()];
    let mut next = 1u16;
    let mut out = vec![0u16; centroids.len()];
    for (c, o) in out.iter_mut().enumerate() {
        let r = uf.find(c);
        *o = *root_label[r].get_or_insert_with(|| {
            next += 1;
            next - 1
        });
    }
    out
}
