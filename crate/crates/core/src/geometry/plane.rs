use serde::{Deserialize, Serialize};

use super::{symmetric_eigen, Vec3};
use crate::error::{Error, Result};

/// Offsets below this magnitude count as "through the origin" when choosing
/// the canonical normal sign.
const OFFSET_TIE: f64 = 1e-12;

/// The plane `{p : normal · p = offset}`.
///
/// Always stored in canonical form: `offset >= 0`, and for planes through the
/// origin the lexicographically larger of `±normal`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    normal: Vec3,
    offset: f64,
}

impl Plane {
    pub fn new(normal: Vec3, offset: f64) -> Result<Self> {
        if !offset.is_finite() {
            return Err(Error::NonFinite("plane offset"));
        }
        let len = normal.norm();
        let n = normal
            .try_normalize()
            .ok_or(Error::DegenerateInput("plane normal has zero length"))?;
        Ok(Self::canonicalize(n, offset / len))
    }

    /// Plane through `point` with the given normal.
    pub fn from_point_normal(point: Vec3, normal: Vec3) -> Result<Self> {
        let n = normal
            .try_normalize()
            .ok_or(Error::DegenerateInput("plane normal has zero length"))?;
        Ok(Self::canonicalize(n, n.dot(point)))
    }

    fn canonicalize(n: Vec3, d: f64) -> Self {
        let flip = if d.abs() <= OFFSET_TIE {
            n.lex_cmp(-n) == core::cmp::Ordering::Less
        } else {
            d < 0.0
        };
        if flip {
            Self {
                normal: -n,
                offset: -d,
            }
        } else {
            Self {
                normal: n,
                offset: d,
            }
        }
    }

    #[inline]
    pub fn normal(&self) -> Vec3 {
        self.normal
    }

    #[inline]
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Re-applies canonicalization; a no-op on any constructed plane.
    pub fn canonical(&self) -> Plane {
        Self::canonicalize(self.normal, self.offset)
    }

    /// Orthogonal projection of `p` onto the plane.
    pub fn project(&self, p: Vec3) -> Vec3 {
        p - self.normal * point_plane_distance(p, self)
    }

    /// Unsigned angle between normals, treating `n` and `-n` as the same plane.
    pub fn angle_to(&self, other: &Plane) -> f64 {
        let c = self.normal.dot(other.normal).abs().min(1.0);
        crate::math::acos(c)
    }
}

/// Signed distance `normal · p − offset`.
#[inline]
pub fn point_plane_distance(p: Vec3, plane: &Plane) -> f64 {
    plane.normal.dot(p) - plane.offset
}

/// Total-least-squares plane: centroid plus the covariance eigenvector of the
/// smallest eigenvalue.
pub fn fit_plane_lsq(points: &[Vec3]) -> Result<Plane> {
    fit_plane_lsq_iter(points.iter().copied(), points.len())
}

pub(crate) fn fit_plane_lsq_iter<I>(points: I, n: usize) -> Result<Plane>
where
    I: Iterator<Item = Vec3> + Clone,
{
    if n < 3 {
        return Err(Error::DegenerateInput("plane fit needs at least 3 points"));
    }
    let mut centroid = Vec3::ZERO;
    for p in points.clone() {
        centroid += p;
    }
    let centroid = centroid / n as f64;
    let mut cov = [[0.0; 3]; 3];
    for p in points {
        let d = (p - centroid).to_array();
        for i in 0..3 {
            for j in i..3 {
                cov[i][j] += d[i] * d[j];
            }
        }
    }
    cov[1][0] = cov[0][1];
    cov[2][0] = cov[0][2];
    cov[2][1] = cov[1][2];
    if !cov.iter().flatten().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("plane fit input"));
    }
    let (vals, vecs) = symmetric_eigen(cov);
    // rank < 2 (coincident or collinear points)
    if vals[2] <= 1e-300 || vals[1] <= 1e-12 * vals[2] {
        return Err(Error::DegenerateInput("points are collinear or coincident"));
    }
    let normal = Vec3::new(vecs[0][0], vecs[1][0], vecs[2][0]);
    Plane::from_point_normal(centroid, normal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{deg, sqrt};
    use alloc::vec::Vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn distance_examples() {
        let ground = Plane::new(Vec3::Z, 0.0).unwrap();
        assert_eq!(point_plane_distance(Vec3::new(3.0, -1.0, 0.0), &ground), 0.0);
        assert_eq!(point_plane_distance(Vec3::new(0.0, 0.0, 2.0), &ground), 2.0);
        let s3 = sqrt(3.0);
        let p = Plane::new(Vec3::splat(1.0) / s3, s3).unwrap();
        assert!((point_plane_distance(Vec3::ZERO, &p) + s3).abs() < 1e-12);
    }

    #[test]
    fn canonical_sign_rules() {
        let p = Plane::new(-Vec3::Z, -2.0).unwrap();
        assert_eq!(p.normal(), Vec3::Z);
        assert_eq!(p.offset(), 2.0);
        let through_origin = Plane::new(-Vec3::Z, 0.0).unwrap();
        assert_eq!(through_origin.normal(), Vec3::Z);
        assert_eq!(through_origin.canonical(), through_origin);
    }

    #[test]
    fn unit_square_fit() {
        let pts = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        let p = fit_plane_lsq(&pts).unwrap();
        assert!((p.normal() - Vec3::Z).norm() < 1e-12);
        assert!(p.offset().abs() < 1e-12);
        let lifted: Vec<Vec3> = pts.iter().map(|p| *p + Vec3::Z * 0.3).collect();
        let p = fit_plane_lsq(&lifted).unwrap();
        assert!((p.offset() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn noisy_tilted_fit_within_fifth_degree() {
        let truth = Vec3::splat(1.0).try_normalize().unwrap();
        let u = truth.any_orthonormal();
        let v = truth.cross(u);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let origin = truth * (1.0 / sqrt(3.0));
        let pts: Vec<Vec3> = (0..200)
            .map(|_| {
                let a: f64 = rng.random_range(-1.0..1.0);
                let b: f64 = rng.random_range(-1.0..1.0);
                // Box-Muller for the normal-direction noise
                let (u1, u2): (f64, f64) = (rng.random(), rng.random());
                let g = sqrt(-2.0 * libm::log(u1.max(1e-300))) * libm::cos(2.0 * crate::math::PI * u2);
                origin + u * a + v * b + truth * (0.001 * g)
            })
            .collect();
        let p = fit_plane_lsq(&pts).unwrap();
        assert!(deg(libm::acos(p.normal().dot(truth).abs().min(1.0))) < 0.2);
    }

    #[test]
    fn collinear_is_degenerate() {
        let pts = [Vec3::ZERO, Vec3::X, Vec3::X * 2.0, Vec3::X * 5.0];
        assert!(matches!(fit_plane_lsq(&pts), Err(Error::DegenerateInput(_))));
        assert!(fit_plane_lsq(&pts[..2]).is_err());
    }
}
