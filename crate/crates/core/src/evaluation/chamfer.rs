use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::KdTree;
use crate::error::{Error, Result};
use crate::geometry::{PlanarPrimitive, Vec3};
use crate::math::sqrt;

/// Chamfer distance terms (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chamfer {
    pub recon_to_gt: f64,
    pub gt_to_recon: f64,
    /// Mean of the two one-way terms.
    pub bi: f64,
}

/// Mean distance from each point of `from` to its nearest point in `to`.
pub fn one_way_chamfer(from: &[Vec3], to: &KdTree) -> Result<f64> {
    if from.is_empty() || to.is_empty() {
        return Err(Error::EmptySet("chamfer point set"));
    }
    let sum: f64 = from
        .iter()
        .map(|&p| sqrt(to.nearest_distance_squared(p).unwrap_or(0.0)))
        .sum();
    Ok(sum / from.len() as f64)
}

pub fn chamfer(recon: &[Vec3], gt: &[Vec3]) -> Result<Chamfer> {
    if recon.is_empty() || gt.is_empty() {
        return Err(Error::EmptySet("chamfer point set"));
    }
    let recon_to_gt = one_way_chamfer(recon, &KdTree::new(gt))?;
    let gt_to_recon = one_way_chamfer(gt, &KdTree::new(recon))?;
    Ok(Chamfer {
        recon_to_gt,
        gt_to_recon,
        bi: 0.5 * (recon_to_gt + gt_to_recon),
    })
}

/// Indexed triangle mesh.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn from_primitives(prims: &[PlanarPrimitive]) -> Self {
        let mut mesh = TriangleMesh::default();
        for p in prims {
            let base = mesh.vertices.len() as u32;
            mesh.vertices.extend(p.corners());
            for t in PlanarPrimitive::triangles() {
                mesh.triangles.push([base + t[0] as u32, base + t[1] as u32, base + t[2] as u32]);
            }
        }
        mesh
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len() as u32;
        if self.triangles.iter().flatten().any(|&i| i >= n) {
            return Err(Error::ShapeMismatch("triangle index out of range"));
        }
        if self.vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("mesh vertex"));
        }
        Ok(())
    }

    fn corners(&self, t: usize) -> (Vec3, Vec3, Vec3) {
        let [a, b, c] = self.triangles[t];
        (self.vertices[a as usize], self.vertices[b as usize], self.vertices[c as usize])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let (a, b, c) = self.corners(t);
        0.5 * (b - a).cross(c - a).norm()
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// `n` points uniformly distributed over the surface.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<Vec3>> {
        let mut cdf = Vec::with_capacity(self.triangles.len());
        let mut acc = 0.0;
        for t in 0..self.triangles.len() {
            acc += self.triangle_area(t);
            cdf.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::EmptySet("mesh has no surface area"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let r = rng.random::<f64>() * acc;
            let t = cdf.partition_point(|&c| c <= r).min(cdf.len() - 1);
            let (a, b, c) = self.corners(t);
            let (mut u, mut v): (f64, f64) = (rng.random(), rng.random());
            if u + v > 1.0 {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            out.push(a + (b - a) * u + (c - a) * v);
        }
        Ok(out)
    }
}
