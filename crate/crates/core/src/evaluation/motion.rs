use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::MotionSequence;
use crate::error::{Error, Result};
use crate::geometry::{symmetric_eigen, Se3, UnitQuat, Vec3};

/// Frames per evaluation segment.
pub const SEGMENT_LEN: usize = 100;
/// A trailing partial segment is scored only if it has at least this many frames.
pub const MIN_TRAILING: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    /// Rigid fit on the first two frames of each segment (W-MPJPE).
    FirstTwoFrames,
    /// Rigid fit on the whole segment (WA-MPJPE).
    FullSegment,
}

/// Rigid transform minimizing `Σ |R src + t − dst|²` (no scale), via Horn's
/// quaternion method.
pub fn rigid_align(src: &[Vec3], dst: &[Vec3]) -> Result<Se3> {
    if src.len() != dst.len() {
        return Err(Error::LengthMismatch(src.len(), dst.len()));
    }
    if src.is_empty() {
        return Err(Error::EmptySet("alignment points"));
    }
    let n = src.len() as f64;
    let cs = src.iter().fold(Vec3::ZERO, |a, &p| a + p) / n;
    let cd = dst.iter().fold(Vec3::ZERO, |a, &p| a + p) / n;
    let mut s = [[0.0; 3]; 3];
    for (&a, &b) in src.iter().zip(dst) {
        let (a, b) = ((a - cs).to_array(), (b - cd).to_array());
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] += a[i] * b[j];
            }
        }
    }
    let [[sxx, sxy, sxz], [syx, syy, syz], [szx, szy, szz]] = s;
    let k = [
        [sxx + syy + szz, syz - szy, szx - sxz, sxy - syx],
        [syz - szy, sxx - syy - szz, sxy + syx, szx + sxz],
        [szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy],
        [sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz],
    ];
    let (_, vecs) = symmetric_eigen(k);
    let rotation = UnitQuat::new(vecs[0][3], vecs[1][3], vecs[2][3], vecs[3][3]).unwrap_or(UnitQuat::IDENTITY);
    let translation = cd - rotation.rotate(cs);
    Ok(Se3::new(rotation, translation))
}

fn check_shapes(pred: &MotionSequence, gt: &MotionSequence) -> Result<()> {
    if pred.len() != gt.len() {
        return Err(Error::LengthMismatch(pred.len(), gt.len()));
    }
    if pred.joint_count() != gt.joint_count() {
        return Err(Error::LengthMismatch(pred.joint_count(), gt.joint_count()));
    }
    Ok(())
}

/// Segment ranges `[start, end)` scored by the world-grounded metrics.
pub fn segments(frames: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut s = 0;
    while s < frames {
        let e = (s + SEGMENT_LEN).min(frames);
        if e - s == SEGMENT_LEN || e - s >= MIN_TRAILING {
            out.push((s, e));
        }
        s = e;
    }
    out
}

/// Mean per-joint position error (mm) over 100-frame segments, each aligned
/// to ground truth independently; the mean is taken over segments.
pub fn world_mpjpe(pred: &MotionSequence, gt: &MotionSequence, mode: Alignment) -> Result<f64> {
    check_shapes(pred, gt)?;
    let segs = segments(pred.len());
    if segs.is_empty() {
        return Err(Error::InsufficientPoints {
            needed: MIN_TRAILING,
            have: pred.len(),
        });
    }
    let mut total = 0.0;
    for &(s, e) in &segs {
        let fit_end = match mode {
            Alignment::FirstTwoFrames => (s + 2).min(e),
            Alignment::FullSegment => e,
        };
        let src: Vec<Vec3> = pred.frames[s..fit_end].iter().flat_map(|f| f.positions()).collect();
        let dst: Vec<Vec3> = gt.frames[s..fit_end].iter().flat_map(|f| f.positions()).collect();
        let align = rigid_align(&src, &dst)?;
        let mut err = 0.0;
        let mut count = 0usize;
        for t in s..e {
            for (p, g) in pred.frames[t].positions().zip(gt.frames[t].positions()) {
                err += align.transform_point(p).distance(g);
                count += 1;
            }
        }
        total += 1000.0 * err / count as f64;
    }
    Ok(total / segs.len() as f64)
}

/// Root drift and temporal smoothness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMetrics {
    /// Final root drift after first-two-frame alignment, as a percentage of
    /// the ground-truth root path length.
    pub rte: f64,
    /// Mean third-difference magnitude of predicted joints, in 10 m/s³.
    pub jitter: f64,
    /// Mean second-difference error against ground truth, in mm/frame².
    pub accel: f64,
}

pub fn trajectory_metrics(pred: &MotionSequence, gt: &MotionSequence) -> Result<TrajectoryMetrics> {
    check_shapes(pred, gt)?;
    let t_len = pred.len();
    if t_len < 2 {
        return Err(Error::InsufficientPoints { needed: 2, have: t_len });
    }
    let src: Vec<Vec3> = pred.frames[..2].iter().flat_map(|f| f.positions()).collect();
    let dst: Vec<Vec3> = gt.frames[..2].iter().flat_map(|f| f.positions()).collect();
    let align = rigid_align(&src, &dst)?;
    let last = t_len - 1;
    let drift = align
        .transform_point(pred.frames[last].root.translation)
        .distance(gt.frames[last].root.translation);
    let path: f64 = gt
        .frames
        .windows(2)
        .map(|w| w[1].root.translation.distance(w[0].root.translation))
        .sum();
    let rte = if path > 1e-12 {
        100.0 * drift / path
    } else if drift <= 1e-12 {
        0.0
    } else {
        return Err(Error::DegenerateInput("ground-truth root path has zero length"));
    };

    let joints = pred.joint_count();
    let pos = |m: &MotionSequence, t: usize, j: usize| m.frames[t].joints[j].position;
    let mut accel = 0.0;
    let mut n_acc = 0usize;
    for t in 1..t_len.saturating_sub(1) {
        for j in 0..joints {
            let a_p = pos(pred, t + 1, j) - pos(pred, t, j) * 2.0 + pos(pred, t - 1, j);
            let a_g = pos(gt, t + 1, j) - pos(gt, t, j) * 2.0 + pos(gt, t - 1, j);
            accel += (a_p - a_g).norm();
            n_acc += 1;
        }
    }
    let accel = if n_acc == 0 { 0.0 } else { 1000.0 * accel / n_acc as f64 };

    let mut jerk = 0.0;
    let mut n_jerk = 0usize;
    for t in 1..t_len.saturating_sub(2) {
        for j in 0..joints {
            let d = pos(pred, t + 2, j) - pos(pred, t + 1, j) * 3.0 + pos(pred, t, j) * 3.0 - pos(pred, t - 1, j);
            jerk += d.norm();
            n_jerk += 1;
        }
    }
    let fps3 = pred.fps * pred.fps * pred.fps;
    let jitter = if n_jerk == 0 { 0.0 } else { jerk / n_jerk as f64 * fps3 / 10.0 };
    Ok(TrajectoryMetrics { rte, jitter, accel })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{JointState, MotionFrame};
    use crate::math::{cos, sin};
    use alloc::vec;

    pub(crate) fn walk(frames: usize, joints: usize) -> MotionSequence {
        let frames = (0..frames)
            .map(|t| {
                let tt = t as f64 / 30.0;
                let root = Vec3::new(tt * 1.2, 0.3 * sin(tt), 0.9);
                let joints = (0..joints)
                    .map(|j| JointState {
                        position: root + Vec3::new(0.1 * cos(j as f64 + tt), 0.15 * j as f64, -0.08 * j as f64),
                        orientation: UnitQuat::rot_z(0.1 * tt + j as f64),
                        linear_velocity: Vec3::ZERO,
                        angular_velocity: Vec3::ZERO,
                    })
                    .collect();
                MotionFrame {
                    root: Se3::new(UnitQuat::rot_z(0.1 * tt), root),
                    joints,
                }
            })
            .collect();
        MotionSequence::new(30.0, frames).unwrap()
    }

    fn map_positions(m: &MotionSequence, f: impl Fn(usize, Vec3) -> Vec3) -> MotionSequence {
        let mut out = m.clone();
        for (t, fr) in out.frames.iter_mut().enumerate() {
            fr.root.translation = f(t, fr.root.translation);
            for j in &mut fr.joints {
                j.position = f(t, j.position);
            }
        }
        out
    }

    #[test]
    fn identical_is_zero() {
        let gt = walk(150, 5);
        assert_eq!(world_mpjpe(&gt, &gt, Alignment::FirstTwoFrames).unwrap(), 0.0);
        assert!(world_mpjpe(&gt, &gt, Alignment::FullSegment).unwrap() < 1e-9);
        let tm = trajectory_metrics(&gt, &gt).unwrap();
        assert!(tm.rte < 1e-9 && tm.accel == 0.0);
    }

    #[test]
    fn rigid_transform_removed_by_both_modes() {
        let gt = walk(230, 6);
        let q = UnitQuat::new(0.9, 0.1, -0.3, 0.2).unwrap();
        let t = Vec3::new(4.0, -2.0, 0.5);
        let pred = map_positions(&gt, |_, p| q.rotate(p) + t);
        assert!(world_mpjpe(&pred, &gt, Alignment::FirstTwoFrames).unwrap() < 1e-6);
        assert!(world_mpjpe(&pred, &gt, Alignment::FullSegment).unwrap() < 1e-6);
    }

    #[test]
    fn offset_after_alignment_frames() {
        // 50 mm z offset on frames 2..100 of a single segment: every frame
        // counts, so the mean is 50 * 98 / 100 = 49 mm
        let gt = walk(100, 4);
        let pred = map_positions(&gt, |t, p| if t >= 2 { p + Vec3::Z * 0.05 } else { p });
        let w = world_mpjpe(&pred, &gt, Alignment::FirstTwoFrames).unwrap();
        assert!((w - 49.0).abs() < 1e-6, "{w}");
    }

    #[test]
    fn segment_schedule() {
        assert_eq!(segments(250), vec![(0, 100), (100, 200), (200, 250)]);
        assert_eq!(segments(205), vec![(0, 100), (100, 200)]);
        assert_eq!(segments(210), vec![(0, 100), (100, 200), (200, 210)]);
        assert!(segments(9).is_empty());
    }

    #[test]
    fn alternating_root_noise_closed_form() {
        let gt = walk(60, 3);
        let pred = map_positions(&gt, |t, p| p + Vec3::X * if t % 2 == 0 { 0.001 } else { -0.001 });
        let tm = trajectory_metrics(&pred, &gt).unwrap();
        // second difference of ±1 mm alternation: 4 mm
        assert!((tm.accel - 4.0).abs() < 1e-6, "{}", tm.accel);
        let still = map_positions(&gt, |_, _| Vec3::new(1.0, 2.0, 3.0));
        assert_eq!(trajectory_metrics(&still, &gt).unwrap().jitter, 0.0);
        // third difference on a stationary body: 8 mm, times 30³ / 10
        let noisy_still = map_positions(&still, |t, p| p + Vec3::X * if t % 2 == 0 { 0.001 } else { -0.001 });
        let j = trajectory_metrics(&noisy_still, &gt).unwrap().jitter;
        assert!((j - 0.008 * 27000.0 / 10.0).abs() < 1e-9, "{j}");
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            world_mpjpe(&walk(20, 2), &walk(21, 2), Alignment::FullSegment),
            Err(Error::LengthMismatch(20, 21))
        ));
    }

    #[test]
    fn align_recovers_rotation() {
        let src = vec![Vec3::X, Vec3::Y, Vec3::Z, Vec3::new(1.0, 2.0, 3.0)];
        let q = UnitQuat::from_axis_angle(Vec3::new(1.0, 1.0, 0.0).try_normalize().unwrap(), 2.5);
        let dst: Vec<Vec3> = src.iter().map(|&p| q.rotate(p) + Vec3::X).collect();
        let a = rigid_align(&src, &dst).unwrap();
        assert!(a.rotation.angle_to(&q) < 1e-9);
        assert!((a.translation - Vec3::X).norm() < 1e-9);
    }
}
