use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{fit_plane_lsq_iter, point_plane_distance, Plane, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RansacParams {
    /// Inlier band half-width (m).
    pub inlier_tol: f64,
    pub iters: usize,
    /// Groups with fewer points are not fitted.
    pub min_points: usize,
    pub seed: u64,
    /// Hypotheses are scored on at most this many randomly drawn points;
    /// the final inlier set always uses the full cloud.
    pub max_score_points: usize,
}

impl Default for RansacParams {
    fn default() -> Self {
        Self {
            inlier_tol: 0.02,
            iters: 500,
            min_points: 50,
            seed: 0,
            max_score_points: 4096,
        }
    }
}

/// Best-consensus plane from 3-point hypotheses, refined by least squares on
/// its inliers. Returns the plane and the indices of all points within
/// `inlier_tol` of it.
pub fn ransac_plane(points: &[Vec3], params: &RansacParams) -> Result<(Plane, Vec<usize>)> {
    let n = points.len();
    if n < 3 {
        return Err(Error::InsufficientPoints { needed: 3, have: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let scored: Vec<Vec3> = if n > params.max_score_points.max(3) {
        (0..params.max_score_points).map(|_| points[rng.random_range(0..n)]).collect()
    } else {
        points.to_vec()
    };
    let tol = params.inlier_tol;
    let count = |plane: &Plane, pts: &[Vec3]| pts.iter().filter(|&&p| point_plane_distance(p, plane).abs() <= tol).count();

    let mut best: Option<(usize, Plane)> = None;
    for _ in 0..params.iters.max(1) {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let mut k = rng.random_range(0..n - 2);
        for taken in [i.min(j), i.max(j)] {
            if k >= taken {
                k += 1;
            }
        }
        let (a, b, c) = (points[i], points[j], points[k]);
        let (ab, ac) = (b - a, c - a);
        let normal = ab.cross(ac);
        if normal.norm() <= 1e-12 * ab.norm() * ac.norm() || normal.norm() == 0.0 {
            continue;
        }
        let Ok(plane) = Plane::from_point_normal(a, normal) else {
            continue;
        };
        let c = count(&plane, &scored);
        if best.is_none_or(|(bc, _)| c > bc) {
            best = Some((c, plane));
        }
    }
    let (_, hypothesis) = best.ok_or(Error::DegenerateInput("all RANSAC samples are collinear"))?;
    let inliers_of = |plane: &Plane| -> Vec<usize> {
        (0..n)
            .filter(|&i| point_plane_distance(points[i], plane).abs() <= tol)
            .collect()
    };
    let first = inliers_of(&hypothesis);
    match fit_plane_lsq_iter(first.iter().map(|&i| points[i]), first.len()) {
        Ok(plane) => {
            let inliers = inliers_of(&plane);
            Ok((plane, inliers))
        }
        Err(_) => Ok((hypothesis, first)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{acos, deg, standard_normal};
    use alloc::vec;

    #[test]
    fn exact_plane_all_inliers() {
        let pts: Vec<Vec3> = (0..1000)
            .map(|i| Vec3::new((i % 40) as f64 * 0.03, (i / 40) as f64 * 0.03, 0.0))
            .map(|p| Vec3::new(p.x, p.y, 0.5 * p.x - 0.25 * p.y + 1.0))
            .collect();
        let (plane, inliers) = ransac_plane(&pts, &RansacParams::default()).unwrap();
        assert_eq!(inliers.len(), 1000);
        let truth = Plane::new(Vec3::new(-0.5, 0.25, 1.0), 1.0).unwrap();
        assert!(plane.angle_to(&truth) < 1e-9);
        assert!((plane.offset() - truth.offset()).abs() < 1e-9);
    }

    #[test]
    fn noisy_plane_with_outliers() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let truth_n = Vec3::new(0.2, -0.1, 1.0).try_normalize().unwrap();
        let u = truth_n.any_orthonormal();
        let v = truth_n.cross(u);
        let mut pts = Vec::new();
        for _ in 0..800 {
            let (a, b) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let noise = 0.005 * standard_normal(&mut rng);
            pts.push(Vec3::new(0.5, 0.5, 0.5) + u * a + v * b + truth_n * noise);
        }
        for _ in 0..200 {
            pts.push(Vec3::new(rng.random(), rng.random(), rng.random()));
        }
        let (plane, inliers) = ransac_plane(&pts, &RansacParams::default()).unwrap();
        let recall = inliers.iter().filter(|&&i| i < 800).count() as f64 / 800.0;
        assert!(recall >= 0.95, "recall {recall}");
        let err = deg(acos(plane.normal().dot(truth_n).abs().min(1.0)));
        assert!(err < 2.0, "normal error {err}°");
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let pts = vec![Vec3::ZERO, Vec3::X, Vec3::X * 2.0];
        assert!(matches!(ransac_plane(&pts, &RansacParams::default()), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn seeded_runs_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vec3> = (0..300).map(|_| Vec3::new(rng.random(), rng.random(), 0.1 * rng.random::<f64>())).collect();
        let p = RansacParams::default();
        assert_eq!(ransac_plane(&pts, &p).unwrap(), ransac_plane(&pts, &p).unwrap());
    }
}
