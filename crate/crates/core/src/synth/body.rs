//! Kinematic body proxy: 8 joints and a fixed set of labeled contact
//! vertices (feet, seat patch, hands).

use alloc::vec::Vec;

use crate::data::{Contact, ContactFrame, JointState, MotionFrame};
use crate::geometry::{Se3, UnitQuat, Vec3};

pub const PELVIS: usize = 0;
pub const HEAD: usize = 1;
pub const LEFT_HAND: usize = 2;
pub const RIGHT_HAND: usize = 3;
pub const LEFT_KNEE: usize = 4;
pub const RIGHT_KNEE: usize = 5;
pub const LEFT_FOOT: usize = 6;
pub const RIGHT_FOOT: usize = 7;
pub const JOINT_COUNT: usize = 8;

/// Vertex ids: 0..4 left sole, 4..8 right sole, 8..38 seat patch
/// (buttocks and thighs, 6 × 5), 38..40 hands.
pub const SOLE_VERTS: usize = 4;
pub const SEAT_ROWS: usize = 6;
pub const SEAT_COLS: usize = 5;
pub const SEAT_FIRST: u32 = 8;
pub const HAND_FIRST: u32 = SEAT_FIRST + (SEAT_ROWS * SEAT_COLS) as u32;
pub const VERTEX_COUNT: usize = HAND_FIRST as usize + 2;

/// Confidence assigned to touching vertices, and to everything else.
pub const CONTACT_CONF: f64 = 0.9;
pub const IDLE_CONF: f64 = 0.05;

/// Scripted pose of one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub pelvis: Vec3,
    /// Heading about +z; the body faces `(cos yaw, sin yaw, 0)`.
    pub yaw: f64,
    pub left_foot: Vec3,
    pub right_foot: Vec3,
    pub left_planted: bool,
    pub right_planted: bool,
    /// Seat rectangle `(center, half extents along heading and lateral)` when seated.
    pub seat: Option<(Vec3, f64, f64)>,
}

impl Pose {
    fn heading(&self) -> (Vec3, Vec3) {
        let f = Vec3::new(crate::math::cos(self.yaw), crate::math::sin(self.yaw), 0.0);
        (f, Vec3::new(-f.y, f.x, 0.0))
    }

    pub fn joints(&self) -> [Vec3; JOINT_COUNT] {
        let (fwd, left) = self.heading();
        let p = self.pelvis;
        let mut j = [Vec3::ZERO; JOINT_COUNT];
        j[PELVIS] = p;
        j[HEAD] = p + Vec3::Z * 0.65;
        j[LEFT_HAND] = p + left * 0.22 + fwd * 0.05;
        j[RIGHT_HAND] = p - left * 0.22 + fwd * 0.05;
        if self.seat.is_some() {
            j[LEFT_KNEE] = Vec3::new(p.x, p.y, p.z - 0.05) + left * 0.1 + fwd * 0.4;
            j[RIGHT_KNEE] = Vec3::new(p.x, p.y, p.z - 0.05) - left * 0.1 + fwd * 0.4;
        } else {
            j[LEFT_KNEE] = (p + left * 0.1 + self.left_foot) * 0.5 + fwd * 0.05;
            j[RIGHT_KNEE] = (p - left * 0.1 + self.right_foot) * 0.5 + fwd * 0.05;
        }
        j[LEFT_FOOT] = self.left_foot;
        j[RIGHT_FOOT] = self.right_foot;
        j
    }

    pub fn contacts(&self) -> Vec<Contact> {
        let (fwd, left) = self.heading();
        let mut out = Vec::with_capacity(VERTEX_COUNT);
        let mut id = 0u32;
        for (foot, planted) in [(self.left_foot, self.left_planted), (self.right_foot, self.right_planted)] {
            for k in 0..SOLE_VERTS {
                let dx = if k & 1 == 0 { -0.08 } else { 0.12 };
                let dy = if k & 2 == 0 { -0.04 } else { 0.04 };
                out.push(Contact {
                    vertex_id: id,
                    confidence: if planted { CONTACT_CONF } else { IDLE_CONF },
                    position: foot + fwd * dx + left * dy,
                });
                id += 1;
            }
        }
        // seat patch: spans the seat rectangle when seated, else hangs below the pelvis
        let (center, hf, hl, conf) = match self.seat {
            Some((c, hf, hl)) => (c, hf, hl, CONTACT_CONF),
            None => (self.pelvis - Vec3::Z * 0.1 + fwd * 0.15, 0.2, 0.18, IDLE_CONF),
        };
        for r in 0..SEAT_ROWS {
            for c in 0..SEAT_COLS {
                let a = -hf + 2.0 * hf * r as f64 / (SEAT_ROWS - 1) as f64;
                let b = -hl + 2.0 * hl * c as f64 / (SEAT_COLS - 1) as f64;
                out.push(Contact {
                    vertex_id: id,
                    confidence: conf,
                    position: center + fwd * a + left * b,
                });
                id += 1;
            }
        }
        let j = self.joints();
        for h in [LEFT_HAND, RIGHT_HAND] {
            out.push(Contact {
                vertex_id: id,
                confidence: IDLE_CONF,
                position: j[h],
            });
            id += 1;
        }
        out
    }
}

/// Motion frames with finite-difference velocities, and contact frames with
/// pelvis speed.
pub fn animate(poses: &[Pose], fps: f64) -> (Vec<MotionFrame>, Vec<ContactFrame>) {
    let joints: Vec<[Vec3; JOINT_COUNT]> = poses.iter().map(|p| p.joints()).collect();
    let n = poses.len();
    let span = |t: usize| -> (usize, usize) {
        match (t > 0, t + 1 < n) {
            (true, true) => (t - 1, t + 1),
            (false, true) => (t, t + 1),
            (true, false) => (t - 1, t),
            (false, false) => (t, t),
        }
    };
    let mut motion = Vec::with_capacity(n);
    let mut contacts = Vec::with_capacity(n);
    for (t, pose) in poses.iter().enumerate() {
        let (a, b) = span(t);
        let dt = if b > a { (b - a) as f64 / fps } else { 1.0 };
        let yaw_rate = if b > a { wrap_angle(poses[b].yaw - poses[a].yaw) / dt } else { 0.0 };
        let q = UnitQuat::rot_z(pose.yaw);
        let states: Vec<JointState> = (0..JOINT_COUNT)
            .map(|j| JointState {
                position: joints[t][j],
                orientation: q,
                linear_velocity: if b > a { (joints[b][j] - joints[a][j]) / dt } else { Vec3::ZERO },
                angular_velocity: Vec3::Z * yaw_rate,
            })
            .collect();
        let speed = states[PELVIS].linear_velocity.norm();
        motion.push(MotionFrame {
            root: Se3::new(q, pose.pelvis),
            joints: states,
        });
        contacts.push(ContactFrame {
            speed,
            contacts: pose.contacts(),
        });
    }
    (motion, contacts)
}

fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * crate::math::PI;
    let w = a - two_pi * crate::math::floor(a / two_pi);
    if w > crate::math::PI { w - two_pi } else { w }
}

/// Axis-aligned-in-heading box around the pose's joints, used to render the
/// person: `(rotation about z, center, half extents)`.
pub fn body_box(pose: &Pose) -> (UnitQuat, Vec3, Vec3) {
    let q = UnitQuat::rot_z(pose.yaw);
    let j = pose.joints();
    let mut lo = Vec3::splat(f64::INFINITY);
    let mut hi = Vec3::splat(f64::NEG_INFINITY);
    for p in j {
        let l = q.inverse_rotate(p - pose.pelvis);
        lo = lo.min(l);
        hi = hi.max(l);
    }
    let pad = Vec3::new(0.08, 0.08, 0.1);
    lo = lo - pad;
    hi = hi + pad;
    // keep the box above the lowest foot so it does not poke through floors
    lo.z = lo.z.max(j[LEFT_FOOT].z.min(j[RIGHT_FOOT].z) - pose.pelvis.z + 0.02);
    let center_local = (lo + hi) * 0.5;
    (q, pose.pelvis + q.rotate(center_local), (hi - lo) * 0.5)
}
