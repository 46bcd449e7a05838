use crisp_core::camera::{CameraTrack, Intrinsics};
use crisp_core::data::{HumanDepth, PointMap, PointMapSequence};
use crisp_core::evaluation::{chamfer, KdTree};
use crisp_core::geometry::{
    cuboid_signed_distance, fit_plane_lsq, point_plane_distance, quat_sub, Mat3, PlanarPrimitive, Plane, Provenance,
    Se3, UnitQuat, Vec3,
};
use crisp_core::ingest::{filter_frame, recover_metric_scale, FilterParams, ScaleStatistic};
use crisp_core::primitive_fit::{build_primitive, complete_from_contacts, ContactEvent, RansacParams};
use crisp_core::segmentation::{
    dbscan, estimate_frame_normals, spherical_kmeans, split_spatial, KMeansParams, NormalMap, NormalParams,
    SpatialParams,
};
use proptest::prelude::*;

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn quat() -> impl Strategy<Value = UnitQuat> {
    (vec3(1.0), -3.1f64..3.1).prop_filter_map("axis", |(a, t)| {
        a.try_normalize().map(|a| UnitQuat::from_axis_angle(a, t))
    })
}

fn unit() -> impl Strategy<Value = Vec3> {
    vec3(1.0).prop_filter_map("nonzero", |v| if v.norm() > 0.1 { v.try_normalize() } else { None })
}

fn lcg(seed: u64) -> impl FnMut() -> f64 {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    move || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (s >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Textbook DBSCAN: core points have at least `min_pts` neighbors within
/// `eps` (self included); clusters are the connected components of core
/// points, numbered by their smallest member; border points take the label
/// of their lowest-index core neighbor.
fn dbscan_reference(pts: &[Vec3], eps: f64, min_pts: usize) -> Vec<Option<usize>> {
    let n = pts.len();
    let near = |a: usize, b: usize| pts[a].distance_squared(pts[b]) <= eps * eps;
    let core: Vec<bool> = (0..n).map(|p| (0..n).filter(|&q| near(p, q)).count() >= min_pts).collect();
    let mut labels = vec![None; n];
    let mut next = 0;
    for s in 0..n {
        if !core[s] || labels[s].is_some() {
            continue;
        }
        labels[s] = Some(next);
        let mut stack = vec![s];
        while let Some(p) = stack.pop() {
            for q in 0..n {
                if core[q] && labels[q].is_none() && near(p, q) {
                    labels[q] = Some(next);
                    stack.push(q);
                }
            }
        }
        next += 1;
    }
    for p in 0..n {
        if !core[p] {
            labels[p] = (0..n).find(|&q| core[q] && near(p, q)).and_then(|q| labels[q]);
        }
    }
    labels
}

fn brute_one_way(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.iter()
        .map(|&p| b.iter().map(|&q| p.distance_squared(q)).fold(f64::INFINITY, f64::min).sqrt())
        .sum::<f64>()
        / a.len() as f64
}

fn height_field(w: usize, h: usize, a: f64, b: f64, c: f64) -> PointMap {
    let mut pts = Vec::with_capacity(w * h);
    for r in 0..h {
        for col in 0..w {
            let (x, y) = (col as f64 * 0.02, r as f64 * 0.02);
            pts.push(Vec3::new(x, y, 2.0 + a * x + b * y + c * x * y));
        }
    }
    PointMap::new(w, h, pts, vec![true; w * h]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quat_sub_round_trip(a in quat(), b in quat()) {
        let r = quat_sub(a, b);
        prop_assert!((b * r).angle_to(&a) < 1e-9);
        prop_assert!(quat_sub(a, a).angle() < 1e-9);
    }

    #[test]
    fn plane_canonical_is_idempotent(n in unit(), d in -10.0f64..10.0) {
        let p = Plane::new(n, d).unwrap();
        let c = p.canonical();
        prop_assert_eq!(c.canonical(), c);
        prop_assert_eq!(c, p);
    }

    #[test]
    fn signed_distance_rigid_invariant(q in quat(), t in vec3(5.0), ext in (0.05f64..2.0, 0.05f64..2.0, 0.05f64..0.5),
                                       c in vec3(2.0), p in vec3(3.0)) {
        let prim = PlanarPrimitive::new(Mat3::IDENTITY, c, Vec3::new(ext.0, ext.1, ext.2), Provenance::Fitted).unwrap();
        let r = q.to_matrix();
        let moved = prim.transformed(&r, t);
        let d0 = cuboid_signed_distance(p, &prim);
        let d1 = cuboid_signed_distance(r * p + t, &moved);
        prop_assert!((d0 - d1).abs() < 1e-9, "{} vs {}", d0, d1);
    }

    #[test]
    fn lsq_residual_zero_on_coplanar(n in unit(), d in -5.0f64..5.0, seed in any::<u64>(), count in 3usize..60) {
        let u = n.any_orthonormal();
        let v = n.cross(u);
        let mut rnd = lcg(seed);
        let mut pts: Vec<Vec3> = (0..count)
            .map(|_| n * d + u * (4.0 * rnd() - 2.0) + v * (4.0 * rnd() - 2.0))
            .collect();
        pts.push(n * d + u * 3.0);
        pts.push(n * d + v * 3.0);
        let fit = fit_plane_lsq(&pts).unwrap();
        for &p in &pts {
            prop_assert!(point_plane_distance(p, &fit).abs() < 1e-9);
        }
    }

    #[test]
    fn recovered_scale_is_equivariant(s in 0.2f64..5.0, c in 0.1f64..10.0, depth in 1.0f64..6.0) {
        let (w, h) = (16, 16);
        let k = Intrinsics::new(20.0, 20.0, 8.0, 8.0).unwrap();
        let pose = Se3::new(UnitQuat::IDENTITY, Vec3::new(0.3, -0.2, 0.1));
        let pts: Vec<Vec3> = (0..w * h)
            .map(|i| pose.transform_point(k.ray((i % w) as f64, (i / w) as f64) * depth))
            .collect();
        let human = vec![HumanDepth { width: w, height: h, depth: vec![depth * s; w * h] }];
        let cams = CameraTrack { intrinsics: k, poses: vec![pose] };
        let seq = PointMapSequence::new(vec![PointMap::new(w, h, pts, vec![true; w * h]).unwrap()]).unwrap();
        let s0 = recover_metric_scale(&seq, &human, &cams, ScaleStatistic::Median).unwrap();
        prop_assert!((s0 - s).abs() < 1e-9 * s);
        let mut scaled = seq.clone();
        scaled.scale(c);
        let s1 = recover_metric_scale(&scaled, &human, &cams.scaled(c), ScaleStatistic::Median).unwrap();
        prop_assert!((s1 * c - s0).abs() < 1e-9 * s0);
    }

    #[test]
    fn filter_is_idempotent(seed in any::<u64>(), px in -2.0f64..2.0, py in -2.0f64..2.0, q in 0.5f64..1.0, radius in 0.5f64..4.0) {
        let (w, h) = (20, 15);
        let mut rnd = lcg(seed);
        let pts: Vec<Vec3> = (0..w * h).map(|_| Vec3::new(6.0 * rnd() - 3.0, 6.0 * rnd() - 3.0, 0.5 + 6.0 * rnd())).collect();
        let valid: Vec<bool> = (0..w * h).map(|_| rnd() > 0.1).collect();
        let frame = PointMap::new(w, h, pts, valid).unwrap();
        let params = FilterParams { depth_percentile: q, pelvis_radius: radius };
        let pose = Se3::IDENTITY;
        let pelvis = Vec3::new(px, py, 2.0);
        let once = filter_frame(&frame, &pose, pelvis, &params);
        let twice = filter_frame(&once, &pose, pelvis, &params);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn normals_have_unit_norm(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -2.0f64..2.0) {
        let frame = height_field(24, 18, a, b, c);
        let nm = estimate_frame_normals(&frame, Vec3::new(0.2, 0.2, -1.0), &NormalParams::default());
        prop_assert!(nm.valid_count() > 0);
        for (n, &ok) in nm.normals.iter().zip(&nm.valid) {
            if ok {
                prop_assert!((n.norm() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn kmeans_partition_rotation_invariant(q in quat(), seed in any::<u64>()) {
        let mut rnd = lcg(seed);
        let axes = [Vec3::X, Vec3::Y, Vec3::Z, -Vec3::Z];
        let data: Vec<Vec3> = (0..200)
            .map(|i| {
                let a = axes[i % 4];
                (a + Vec3::new(rnd() - 0.5, rnd() - 0.5, rnd() - 0.5) * 0.1).try_normalize().unwrap()
            })
            .collect();
        let params = KMeansParams { k: 4, ..Default::default() };
        let (_, l0) = spherical_kmeans(&data, &params);
        let rotated: Vec<Vec3> = data.iter().map(|&v| q.rotate(v)).collect();
        let (_, l1) = spherical_kmeans(&rotated, &params);
        for i in 0..data.len() {
            for j in 0..i {
                prop_assert_eq!(l0[i] == l0[j], l1[i] == l1[j]);
            }
        }
    }

    #[test]
    fn split_spatial_disjoint_and_covering(seed in any::<u64>(), eps in 0.05f64..0.3) {
        let (w, h) = (16, 12);
        let mut rnd = lcg(seed);
        let pts: Vec<Vec3> = (0..w * h).map(|_| Vec3::new(rnd(), rnd(), rnd())).collect();
        let valid: Vec<bool> = (0..w * h).map(|_| rnd() > 0.1).collect();
        let frame = PointMap::new(w, h, pts, valid).unwrap();
        let labels: Vec<u16> = (0..w * h).map(|_| (rnd() * 3.0) as u16).collect();
        let normals = NormalMap { width: w, height: h, normals: vec![Vec3::Z; w * h], valid: vec![true; w * h] };
        let params = SpatialParams { eps, min_pts: 3, min_segment_size: 1 };
        let segs = split_spatial(0, &frame, &normals, &labels, &params);
        let mut seen = vec![0usize; w * h];
        for s in &segs {
            for &m in &s.members {
                seen[m as usize] += 1;
            }
        }
        let mut expected = vec![0usize; w * h];
        for k in 1..3u16 {
            let pix: Vec<usize> = (0..w * h).filter(|&i| labels[i] == k && frame.usable(i)).collect();
            let sub: Vec<Vec3> = pix.iter().map(|&i| frame.points[i]).collect();
            for (&i, l) in pix.iter().zip(dbscan_reference(&sub, eps, 3)) {
                if l.is_some() {
                    expected[i] = 1;
                }
            }
        }
        prop_assert_eq!(seen, expected);
    }

    #[test]
    fn dbscan_matches_reference(seed in any::<u64>(), n in 1usize..250, eps in 0.02f64..0.4, min_pts in 1usize..8) {
        let mut rnd = lcg(seed);
        let pts: Vec<Vec3> = (0..n).map(|_| Vec3::new(rnd(), rnd(), 0.3 * rnd())).collect();
        prop_assert_eq!(dbscan(&pts, eps, min_pts), dbscan_reference(&pts, eps, min_pts));
    }

    #[test]
    fn built_rotation_is_orthonormal(n in unit(), d in -3.0f64..3.0, seed in any::<u64>()) {
        let u = n.any_orthonormal();
        let v = n.cross(u);
        let mut rnd = lcg(seed);
        let pts: Vec<Vec3> = (0..80).map(|_| n * d + u * (2.0 * rnd()) + v * rnd()).collect();
        let prim = build_primitive(&Plane::new(n, d).unwrap(), &pts).unwrap();
        prop_assert!(prim.rotation.orthonormality_error() < 1e-9);
        prop_assert!((prim.rotation.det() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn contact_primitives_have_min_thickness(z in -1.0f64..2.0, spread in 0.0f64..0.2, seed in any::<u64>()) {
        let mut rnd = lcg(seed);
        let points: Vec<Vec3> = (0..40)
            .map(|_| Vec3::new(0.5 * rnd(), 0.4 * rnd(), z + spread * (rnd() - 0.5)))
            .collect();
        let ev = ContactEvent { frame: 0, points, start: 0, end: 15 };
        for p in complete_from_contacts(&[ev], None, &RansacParams::default()) {
            prop_assert!(p.primitive.extents.z >= 0.05);
            prop_assert_eq!(p.primitive.provenance, Provenance::ContactCompleted);
        }
    }

    #[test]
    fn chamfer_symmetric_and_exact(seed in any::<u64>(), na in 1usize..120, nb in 1usize..120) {
        let mut rnd = lcg(seed);
        let a: Vec<Vec3> = (0..na).map(|_| Vec3::new(rnd(), rnd(), rnd())).collect();
        let b: Vec<Vec3> = (0..nb).map(|_| Vec3::new(rnd(), rnd(), rnd())).collect();
        let ab = chamfer(&a, &b).unwrap();
        let ba = chamfer(&b, &a).unwrap();
        prop_assert_eq!(ab.bi, ba.bi);
        prop_assert_eq!(ab.recon_to_gt, brute_one_way(&a, &b));
        prop_assert_eq!(ab.gt_to_recon, brute_one_way(&b, &a));
        let tree = KdTree::new(&b);
        for &p in &a {
            let brute = b.iter().map(|&q| p.distance_squared(q)).fold(f64::INFINITY, f64::min);
            prop_assert_eq!(tree.nearest_distance_squared(p), Some(brute));
        }
    }

    #[test]
    fn unprojection_round_trip(fx in 50.0f64..2000.0, fy in 50.0f64..2000.0, cx in 0.0f64..640.0, cy in 0.0f64..480.0,
                               u in 0.0f64..640.0, v in 0.0f64..480.0, z in 0.1f64..50.0) {
        let k = Intrinsics::new(fx, fy, cx, cy).unwrap();
        let p = k.ray(u, v) * z;
        let px = k.project(p).unwrap();
        prop_assert!((px.x - u).abs() < 1e-9 && (px.y - v).abs() < 1e-9);
        prop_assert!((p.z - z).abs() < 1e-9);
    }
}
