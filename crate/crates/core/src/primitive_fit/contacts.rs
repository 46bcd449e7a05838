use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{build_primitive_oriented, ransac_plane, FittedPrimitive, RansacParams};
use crate::data::{ContactSequence, MotionSequence};
use crate::geometry::{Provenance, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContactParams {
    /// Minimum run length in frames.
    pub window: usize,
    /// Minimum per-frame vertex confidence.
    pub tau: f64,
    /// Maximum body speed (m/s).
    pub nu: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        Self {
            window: 15,
            tau: 0.5,
            nu: 0.3,
        }
    }
}

/// A stable contact: the least-motion frame of a qualifying run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactEvent {
    pub frame: usize,
    /// World positions of the contact vertices at `frame` with confidence ≥ τ.
    pub points: Vec<Vec3>,
    /// Qualifying run `[start, end)`.
    pub start: usize,
    pub end: usize,
}

/// One event per maximal run of at least `window` frames in which every
/// frame has a vertex with confidence ≥ τ and body speed ≤ ν. The event frame
/// is the slowest frame of the run (earliest on ties).
pub fn filter_contacts(contacts: &ContactSequence, params: &ContactParams) -> Vec<ContactEvent> {
    let ok: Vec<bool> = contacts
        .frames
        .iter()
        .map(|f| f.max_confidence() >= params.tau && f.speed <= params.nu)
        .collect();
    let mut events = Vec::new();
    let mut t = 0;
    while t < ok.len() {
        if !ok[t] {
            t += 1;
            continue;
        }
        let start = t;
        while t < ok.len() && ok[t] {
            t += 1;
        }
        if t - start < params.window.max(1) {
            continue;
        }
        let mut best = start;
        for i in start..t {
            if contacts.frames[i].speed < contacts.frames[best].speed {
                best = i;
            }
        }
        let points = contacts.frames[best]
            .contacts
            .iter()
            .filter(|c| c.confidence >= params.tau)
            .map(|c| c.position)
            .collect();
        events.push(ContactEvent {
            frame: best,
            points,
            start,
            end: t,
        });
    }
    events
}

/// Fits a primitive to each event's contact points; the fit statistics use
/// the RANSAC inliers.
///
/// The extrusion normal points away from the body: away from the pelvis at
/// the event frame when `motion` is given, otherwise downward. Degenerate
/// events are skipped with a warning.
pub fn complete_from_contacts(
    events: &[ContactEvent],
    motion: Option<&MotionSequence>,
    params: &RansacParams,
) -> Vec<FittedPrimitive> {
    let mut out = Vec::new();
    for (e_idx, ev) in events.iter().enumerate() {
        if ev.points.len() < 3 {
            log::warn!("contact event {e_idx} at frame {} has {} points, skipped", ev.frame, ev.points.len());
            continue;
        }
        let seeded = RansacParams {
            seed: params.seed.wrapping_add(e_idx as u64),
            ..*params
        };
        let (plane, inliers) = match ransac_plane(&ev.points, &seeded) {
            Ok(r) => r,
            Err(err) => {
                log::warn!("contact event {e_idx} at frame {}: {err}, skipped", ev.frame);
                continue;
            }
        };
        let pts: Vec<Vec3> = inliers.iter().map(|&i| ev.points[i]).collect();
        let centroid = pts.iter().fold(Vec3::ZERO, |a, &p| a + p) / pts.len() as f64;
        let away = match motion.and_then(|m| m.frames.get(ev.frame)) {
            Some(f) => centroid - f.pelvis(),
            None => -Vec3::Z,
        };
        match build_primitive_oriented(&plane, &pts, away, Provenance::ContactCompleted) {
            Ok(p) => out.push(FittedPrimitive::new(p, None, &pts)),
            Err(err) => log::warn!("contact event {e_idx} at frame {}: {err}, skipped", ev.frame),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Contact, ContactFrame};
    use alloc::vec;

    fn frame(conf: f64, speed: f64) -> ContactFrame {
        ContactFrame {
            speed,
            contacts: vec![Contact {
                vertex_id: 0,
                confidence: conf,
                position: Vec3::ZERO,
            }],
        }
    }

    fn seq(frames: Vec<ContactFrame>) -> ContactSequence {
        ContactSequence::new(frames).unwrap()
    }

    #[test]
    fn slowest_frame_selected() {
        let frames = (0..40).map(|t| frame(0.9, if t == 17 { 0.01 } else { 0.1 })).collect();
        let ev = filter_contacts(&seq(frames), &ContactParams::default());
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].frame, 17);
        assert_eq!((ev[0].start, ev[0].end), (0, 40));
    }

    #[test]
    fn ties_pick_earliest() {
        let frames = (0..20).map(|_| frame(0.9, 0.1)).collect();
        assert_eq!(filter_contacts(&seq(frames), &ContactParams::default())[0].frame, 0);
    }

    #[test]
    fn confidence_dip_breaks_window() {
        // 20 frames with a dip at 10: runs of 10 and 9, both shorter than 15
        let frames = (0..20).map(|t| frame(if t == 10 { 0.2 } else { 0.9 }, 0.1)).collect();
        assert!(filter_contacts(&seq(frames), &ContactParams::default()).is_empty());
    }

    #[test]
    fn two_separated_runs() {
        // qualifying: 0..16 and 30..50; speed too high in between
        let frames = (0..50)
            .map(|t| {
                let fast = (16..30).contains(&t);
                let speed = if fast { 1.0 } else { 0.05 + 0.001 * ((t * 7) % 11) as f64 };
                frame(0.8, speed)
            })
            .collect();
        let ev = filter_contacts(&seq(frames), &ContactParams::default());
        assert_eq!(ev.len(), 2);
        assert_eq!((ev[0].start, ev[0].end), (0, 16));
        assert_eq!((ev[1].start, ev[1].end), (30, 50));
        // (t * 7) % 11 == 0 first at t = 0 and t = 33
        assert_eq!(ev[0].frame, 0);
        assert_eq!(ev[1].frame, 33);
    }

    #[test]
    fn seated_patch_gives_seat_plane() {
        let mut points = Vec::new();
        for i in 0..8 {
            for j in 0..6 {
                points.push(Vec3::new(0.3 + i as f64 * 0.04, -0.1 + j as f64 * 0.04, 0.45));
            }
        }
        let ev = ContactEvent {
            frame: 0,
            points,
            start: 0,
            end: 15,
        };
        let prims = complete_from_contacts(&[ev], None, &RansacParams::default());
        assert_eq!(prims.len(), 1);
        let p = prims[0].primitive;
        assert_eq!(prims[0].inlier_count, 48);
        assert!(prims[0].group.is_none());
        assert_eq!(p.provenance, Provenance::ContactCompleted);
        assert!((p.observed_face_center().z - 0.45).abs() < 1e-9);
        assert!((p.normal() - (-Vec3::Z)).norm() < 1e-9);
        assert_eq!(p.extents.z, 0.05);
    }

    #[test]
    fn too_few_points_skipped() {
        let ev = ContactEvent {
            frame: 3,
            points: vec![Vec3::ZERO, Vec3::X],
            start: 0,
            end: 15,
        };
        assert!(complete_from_contacts(&[ev], None, &RansacParams::default()).is_empty());
    }

    #[test]
    fn thin_spread_clamped() {
        let points: Vec<Vec3> = (0..30)
            .map(|i| Vec3::new((i % 6) as f64 * 0.05, (i / 6) as f64 * 0.05, if i % 2 == 0 { 0.005 } else { -0.005 }))
            .collect();
        let ev = ContactEvent {
            frame: 0,
            points,
            start: 0,
            end: 15,
        };
        let p = complete_from_contacts(&[ev], None, &RansacParams::default())[0].primitive;
        assert_eq!(p.extents.z, 0.05);
    }
}
