//! Scripted scenes, camera paths and body motions.

use alloc::vec;
use alloc::vec::Vec;

use super::body::{Pose, JOINT_COUNT};
use crate::camera::CameraTrack;
use crate::geometry::{Mat3, PlanarPrimitive, Provenance, Se3, Vec3, DEFAULT_THICKNESS};
use crate::math::{atan2, cos, sin, PI};

/// Slab whose observed face is the rectangle centered at `face` with in-plane
/// axis `x`, extruded by `thickness` along `n`.
pub fn slab(face: Vec3, x: Vec3, n: Vec3, sx: f64, sy: f64, thickness: f64) -> PlanarPrimitive {
    let y = n.cross(x);
    PlanarPrimitive::new(
        Mat3::from_cols(x, y, n),
        face + n * (0.5 * thickness),
        Vec3::new(sx, sy, thickness),
        Provenance::Fitted,
    )
    .expect("scene slabs are well formed")
}

fn thin(face: Vec3, x: Vec3, n: Vec3, sx: f64, sy: f64) -> PlanarPrimitive {
    slab(face, x, n, sx, sy, DEFAULT_THICKNESS)
}

/// Top, front (−y) and one side face of an axis-aligned box standing on the
/// floor; the side faces `+x` when `side_plus_x`.
fn box_faces(center_xy: (f64, f64), size: Vec3, side_plus_x: bool) -> [PlanarPrimitive; 3] {
    let (cx, cy) = center_xy;
    let top = thin(Vec3::new(cx, cy, size.z), Vec3::X, -Vec3::Z, size.x, size.y);
    let front = thin(Vec3::new(cx, cy - 0.5 * size.y, 0.5 * size.z), Vec3::X, Vec3::Y, size.x, size.z);
    let (sx, n) = if side_plus_x { (cx + 0.5 * size.x, -Vec3::X) } else { (cx - 0.5 * size.x, Vec3::X) };
    let side = thin(Vec3::new(sx, cy, 0.5 * size.z), Vec3::Y, n, size.y, size.z);
    [top, front, side]
}

pub const STAIR_RISE: f64 = 0.2;
pub const STAIR_RUN: f64 = 0.35;
pub const STAIR_WIDTH: f64 = 1.6;
pub const STAIR_START_Y: f64 = 1.5;
pub const STAIR_STEPS: usize = 5;

/// Ground plus 5 risers and 5 treads climbing toward +y.
pub fn stairs_scene() -> Vec<PlanarPrimitive> {
    let mut out = vec![thin(Vec3::new(0.0, 2.5, 0.0), Vec3::X, -Vec3::Z, 1.6, 8.0)];
    for k in 1..=STAIR_STEPS {
        let kf = k as f64;
        let y_front = STAIR_START_Y + (kf - 1.0) * STAIR_RUN;
        out.push(thin(
            Vec3::new(0.0, y_front, (kf - 0.5) * STAIR_RISE),
            Vec3::X,
            Vec3::Y,
            STAIR_WIDTH,
            STAIR_RISE,
        ));
        out.push(thin(
            Vec3::new(0.0, y_front + 0.5 * STAIR_RUN, kf * STAIR_RISE),
            Vec3::X,
            -Vec3::Z,
            STAIR_WIDTH,
            STAIR_RUN,
        ));
    }
    out
}

pub const ROOM_HALF: f64 = 2.2;

pub const SEAT_CENTER: Vec3 = Vec3::new(0.0, 1.0, 0.45);
/// Seat size along x (lateral when seated facing −y) and y.
pub const SEAT_SIZE: (f64, f64) = (0.44, 0.40);

fn room_shell(half: f64, height: f64) -> Vec<PlanarPrimitive> {
    vec![
        thin(Vec3::ZERO, Vec3::X, -Vec3::Z, 2.0 * half, 2.0 * half),
        thin(Vec3::new(0.0, half, 0.5 * height), Vec3::X, Vec3::Y, 2.0 * half, height),
        thin(Vec3::new(half, 0.0, 0.5 * height), Vec3::Y, Vec3::X, 2.0 * half, height),
    ]
}

/// Floor, two walls, a table top, and the seat (last).
pub fn sit_scene() -> Vec<PlanarPrimitive> {
    let mut out = room_shell(2.5, 2.5);
    out.push(thin(Vec3::new(-1.3, 1.8, 0.75), Vec3::X, -Vec3::Z, 1.0, 0.6));
    out.push(thin(SEAT_CENTER, Vec3::X, -Vec3::Z, SEAT_SIZE.0, SEAT_SIZE.1));
    out
}

pub fn walk_scene() -> Vec<PlanarPrimitive> {
    room_shell(2.5, 2.5)
}

/// 20 planes: floor, three walls, a table top, four boxes (three faces
/// each), two shelf boards and a bench top.
pub fn room_scene() -> Vec<PlanarPrimitive> {
    let h = ROOM_HALF;
    let mut out = vec![
        thin(Vec3::ZERO, Vec3::X, -Vec3::Z, 2.0 * h, 2.0 * h),
        thin(Vec3::new(0.0, h, 1.25), Vec3::X, Vec3::Y, 2.0 * h, 2.5),
        thin(Vec3::new(-h, 0.0, 1.25), Vec3::Y, -Vec3::X, 2.0 * h, 2.5),
        thin(Vec3::new(h, 0.0, 1.25), Vec3::Y, Vec3::X, 2.0 * h, 2.5),
        thin(Vec3::new(-0.9, 1.2, 0.75), Vec3::X, -Vec3::Z, 1.0, 0.7),
    ];
    out.extend(box_faces((0.9, 1.3), Vec3::new(0.6, 0.5, 0.5), false));
    out.extend(box_faces((1.6, 0.2), Vec3::new(0.5, 0.5, 0.8), false));
    out.extend(box_faces((-1.6, 0.3), Vec3::new(0.7, 0.5, 0.45), true));
    out.extend(box_faces((0.1, 0.8), Vec3::new(0.5, 0.4, 0.35), false));
    out.push(thin(Vec3::new(1.6, -1.0, 1.1), Vec3::X, -Vec3::Z, 0.9, 0.3));
    out.push(thin(Vec3::new(1.6, -0.5, 1.5), Vec3::X, -Vec3::Z, 0.9, 0.3));
    out.push(thin(Vec3::new(-1.5, -1.0, 0.45), Vec3::X, -Vec3::Z, 1.0, 0.4));
    out
}

/// Camera moving linearly from `a` to `b` while looking at `target`.
pub fn sweep(frames: usize, a: Vec3, b: Vec3, target: Vec3) -> Vec<Se3> {
    (0..frames)
        .map(|t| {
            let s = if frames > 1 { t as f64 / (frames - 1) as f64 } else { 0.0 };
            CameraTrack::look_at(a + (b - a) * s, target)
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy)]
struct Step {
    side: Side,
    to: Vec3,
    start: usize,
    end: usize,
}

const PELVIS_HEIGHT: f64 = 0.95;
const FOOT_LIFT: f64 = 0.08;

/// Poses from alternating footsteps; the pelvis rides above the feet.
fn gait(frames: usize, start_left: Vec3, start_right: Vec3, steps: &[Step], yaw: f64) -> Vec<Pose> {
    (0..frames)
        .map(|t| {
            let mut feet = [(start_left, true), (start_right, true)];
            for s in steps {
                let k = match s.side {
                    Side::Left => 0,
                    Side::Right => 1,
                };
                if t >= s.end {
                    feet[k] = (s.to, true);
                } else if t >= s.start {
                    let u = (t - s.start) as f64 / (s.end - s.start) as f64;
                    let from = feet[k].0;
                    let lift = FOOT_LIFT * sin(PI * u);
                    feet[k] = (from + (s.to - from) * u + Vec3::Z * lift, false);
                }
            }
            let mid = (feet[0].0 + feet[1].0) * 0.5;
            let base = feet[0].0.z.max(feet[1].0.z).min(mid.z + 0.1);
            Pose {
                pelvis: Vec3::new(mid.x, mid.y, base + PELVIS_HEIGHT),
                yaw,
                left_foot: feet[0].0,
                right_foot: feet[1].0,
                left_planted: feet[0].1,
                right_planted: feet[1].1,
                seat: None,
            }
        })
        .collect()
}

fn stride_steps(first: usize, dur: usize, targets: &[(Side, Vec3)]) -> Vec<Step> {
    targets
        .iter()
        .enumerate()
        .map(|(k, &(side, to))| Step {
            side,
            to,
            start: first + k * dur,
            end: first + (k + 1) * dur,
        })
        .collect()
}

/// Walk along +x across the room at about 1 m/s.
pub fn walk_motion(frames: usize) -> Vec<Pose> {
    let y = 0.3;
    let half_width = 0.12;
    let mut targets = Vec::new();
    let mut x = -1.6;
    let mut k = 0;
    while targets.len() * 18 < frames {
        x += 0.6;
        let side = if k % 2 == 0 { Side::Left } else { Side::Right };
        let dy = if k % 2 == 0 { half_width } else { -half_width };
        targets.push((side, Vec3::new(x, y + dy, 0.0)));
        k += 1;
    }
    let steps = stride_steps(0, 18, &targets);
    gait(
        frames,
        Vec3::new(-1.9, y + half_width, 0.0),
        Vec3::new(-1.6, y - half_width, 0.0),
        &steps,
        0.0,
    )
}

/// Approach the stairs, climb one tread per step, then stand on the top tread.
pub fn stairs_motion(frames: usize) -> Vec<Pose> {
    let x = 0.35;
    let w = 0.12;
    let scale = frames as f64 / 100.0;
    let f = |v: f64| -> usize { (v * scale) as usize };
    let mut targets = vec![
        (Side::Left, Vec3::new(x + w, 0.6, 0.0)),
        (Side::Right, Vec3::new(x - w, 1.0, 0.0)),
        (Side::Left, Vec3::new(x + w, 1.3, 0.0)),
    ];
    for k in 1..=STAIR_STEPS {
        let kf = k as f64;
        let y = STAIR_START_Y + (kf - 0.5) * STAIR_RUN;
        let side = if k % 2 == 1 { Side::Right } else { Side::Left };
        let dx = if k % 2 == 1 { -w } else { w };
        targets.push((side, Vec3::new(x + dx, y, kf * STAIR_RISE)));
    }
    let top = Vec3::new(x + w, STAIR_START_Y + (STAIR_STEPS as f64 - 0.5) * STAIR_RUN, STAIR_STEPS as f64 * STAIR_RISE);
    targets.push((Side::Left, top));
    let dur = f(9.0).max(2);
    let steps = stride_steps(f(2.0), dur, &targets);
    gait(frames, Vec3::new(x + w, 0.2, 0.0), Vec3::new(x - w, 0.3, 0.0), &steps, 0.5 * PI)
}

/// Walk to the chair, turn and sit down, then stay seated.
pub fn sit_motion(frames: usize) -> Vec<Pose> {
    let scale = frames as f64 / 100.0;
    let walk_end = (35.0 * scale) as usize;
    let sit_end = (50.0 * scale) as usize;
    let front = Vec3::new(0.0, SEAT_CENTER.y - 0.45, 0.0);
    let w = 0.12;
    let targets = [
        (Side::Left, Vec3::new(-1.1, front.y + w, 0.0)),
        (Side::Right, Vec3::new(-0.6, front.y - w, 0.0)),
        (Side::Left, Vec3::new(-0.1, front.y + w, 0.0)),
        (Side::Right, Vec3::new(0.12, front.y, 0.0)),
        (Side::Left, Vec3::new(-0.12, front.y, 0.0)),
    ];
    let dur = (walk_end / targets.len()).max(1);
    let steps = stride_steps(0, dur, &targets);
    let mut poses = gait(frames, Vec3::new(-1.6, front.y + w, 0.0), Vec3::new(-1.6, front.y - w, 0.0), &steps, 0.0);
    let stand = poses[walk_end.min(frames - 1)];
    let seated_pelvis = Vec3::new(SEAT_CENTER.x, SEAT_CENTER.y - 0.05, SEAT_CENTER.z + 0.12);
    for (t, pose) in poses.iter_mut().enumerate().skip(walk_end) {
        let feet = (Vec3::new(-0.12, front.y, 0.0), Vec3::new(0.12, front.y, 0.0));
        pose.left_foot = feet.0;
        pose.right_foot = feet.1;
        pose.left_planted = true;
        pose.right_planted = true;
        if t < sit_end {
            let u = (t - walk_end) as f64 / (sit_end - walk_end).max(1) as f64;
            pose.pelvis = stand.pelvis + (seated_pelvis - stand.pelvis) * u;
            pose.yaw = -0.5 * PI * u;
            pose.seat = None;
        } else {
            let phase = (t - sit_end) as f64 * 0.2;
            pose.pelvis = seated_pelvis + Vec3::new(0.002 * sin(phase), 0.0, 0.001 * cos(phase));
            pose.yaw = -0.5 * PI;
            pose.seat = Some((SEAT_CENTER, 0.5 * SEAT_SIZE.1, 0.5 * SEAT_SIZE.0));
        }
    }
    poses
}

/// Wander through the room in a slow arc.
pub fn room_motion(frames: usize) -> Vec<Pose> {
    (0..frames)
        .map(|t| {
            let s = t as f64 / frames.max(1) as f64;
            let a = -0.8 + 1.6 * s;
            let pelvis = Vec3::new(1.0 * sin(a), -0.2 + 0.4 * cos(a), PELVIS_HEIGHT);
            let yaw = atan2(-sin(a), cos(a));
            let fwd = Vec3::new(cos(yaw), sin(yaw), 0.0);
            let left = Vec3::new(-fwd.y, fwd.x, 0.0);
            let swing = 0.15 * sin(8.0 * PI * s);
            let lf = Vec3::new(pelvis.x, pelvis.y, 0.0) + left * 0.12 + fwd * swing;
            let rf = Vec3::new(pelvis.x, pelvis.y, 0.0) - left * 0.12 - fwd * swing;
            Pose {
                pelvis,
                yaw,
                left_foot: lf,
                right_foot: rf,
                left_planted: swing >= 0.0,
                right_planted: swing < 0.0,
                seat: None,
            }
        })
        .collect()
}

const _: () = assert!(JOINT_COUNT == 8);
