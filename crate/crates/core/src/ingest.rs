//! Metric scale recovery and the spatial point filters applied before
//! segmentation.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::camera::CameraTrack;
use crate::data::{HumanDepth, MotionSequence, PointMap, PointMapSequence};
use crate::error::{Error, Result};
use crate::geometry::{Se3, Vec3};
use crate::math::{median, nearest_rank};

/// Minimum number of valid human pixels in at least one frame.
pub const MIN_HUMAN_PIXELS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleStatistic {
    #[default]
    Median,
    Mean,
}

/// Scale factor `s` that makes the point maps metric: the median (or mean)
/// over all human pixels of `human depth / point-map depth`, both measured
/// along the optical axis of the frame's camera.
///
/// Camera translations are assumed to share the point maps' unknown scale.
pub fn recover_metric_scale(
    points: &PointMapSequence,
    human: &[HumanDepth],
    cams: &CameraTrack,
    statistic: ScaleStatistic,
) -> Result<f64> {
    if human.len() != points.len() || cams.poses.len() != points.len() {
        return Err(Error::LengthMismatch(human.len(), points.len()));
    }
    let mut ratios = Vec::new();
    let mut best = 0;
    for (t, (frame, hd)) in points.frames.iter().zip(human).enumerate() {
        if hd.depth.len() != frame.len() {
            return Err(Error::ShapeMismatch("human depth grid size"));
        }
        let world_to_cam = cams.poses[t].inverse();
        let before = ratios.len();
        for i in 0..frame.len() {
            if !frame.valid[i] || !hd.is_human(i) {
                continue;
            }
            let z = world_to_cam.transform_point(frame.points[i]).z;
            if z > 0.0 {
                ratios.push(hd.depth[i] / z);
            }
        }
        best = best.max(ratios.len() - before);
    }
    if best < MIN_HUMAN_PIXELS {
        return Err(Error::InsufficientOverlap {
            best,
            needed: MIN_HUMAN_PIXELS,
        });
    }
    let s = match statistic {
        ScaleStatistic::Median => median(&mut ratios).unwrap_or(1.0),
        ScaleStatistic::Mean => ratios.iter().sum::<f64>() / ratios.len() as f64,
    };
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::DegenerateInput("recovered scale is not positive"));
    }
    Ok(s)
}

/// Rescales point maps and camera translations together.
pub fn apply_scale(points: &mut PointMapSequence, cams: &CameraTrack, s: f64) -> CameraTrack {
    points.scale(s);
    cams.scaled(s)
}

/// Marks human pixels as rejected so they never reach segmentation.
pub fn reject_humans(points: &mut PointMapSequence, human: &[HumanDepth]) {
    for (frame, hd) in points.frames.iter_mut().zip(human) {
        for (i, r) in frame.rejected.iter_mut().enumerate() {
            if hd.is_human(i) {
                *r = true;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterParams {
    /// Points deeper than this per-frame depth percentile are dropped.
    pub depth_percentile: f64,
    /// Points farther than this from the frame's pelvis are dropped (m).
    pub pelvis_radius: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            depth_percentile: 0.95,
            pelvis_radius: 2.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RepairParams {
    /// Half-width of the median window; 0 disables repair.
    pub window: usize,
    /// A point is isolated when its depth differs from the window median by
    /// more than this fraction of that median.
    pub rel_tol: f64,
}

impl Default for RepairParams {
    fn default() -> Self {
        Self { window: 1, rel_tol: 0.03 }
    }
}

/// Moves isolated points along their camera ray to the median depth of the
/// usable points in the surrounding window. `pose` is camera-to-world.
pub fn repair_frame(frame: &PointMap, pose: &Se3, params: &RepairParams) -> PointMap {
    let mut out = frame.clone();
    if params.window == 0 {
        return out;
    }
    let world_to_cam = pose.inverse();
    let depths: Vec<f64> = frame
        .points
        .iter()
        .map(|&p| world_to_cam.transform_point(p).z)
        .collect();
    let (w, h, k) = (frame.width, frame.height, params.window);
    let mut window = Vec::with_capacity((2 * k + 1) * (2 * k + 1));
    let eye = pose.translation;
    for i in 0..frame.len() {
        if !frame.usable(i) || depths[i] <= 0.0 {
            continue;
        }
        let (r, c) = (i / w, i % w);
        window.clear();
        for rr in r.saturating_sub(k)..=(r + k).min(h - 1) {
            for cc in c.saturating_sub(k)..=(c + k).min(w - 1) {
                let j = rr * w + cc;
                if frame.usable(j) {
                    window.push(depths[j]);
                }
            }
        }
        let Some(m) = median(&mut window) else { continue };
        if m > 0.0 && (depths[i] - m).abs() > params.rel_tol * m {
            out.points[i] = eye + (frame.points[i] - eye) * (m / depths[i]);
        }
    }
    out
}

/// Applies [`filter_frame`] to every frame with that frame's camera and
/// pelvis.
pub fn filter_points(
    points: &PointMapSequence,
    motion: &MotionSequence,
    cams: &CameraTrack,
    params: &FilterParams,
) -> Result<PointMapSequence> {
    if motion.len() != points.len() {
        return Err(Error::LengthMismatch(motion.len(), points.len()));
    }
    let frames = points
        .frames
        .iter()
        .enumerate()
        .map(|(t, f)| filter_frame(f, &cams.poses[t], motion.frames[t].pelvis(), params))
        .collect();
    PointMapSequence::new(frames)
}

/// Per-frame depth-percentile and pelvis-radius filter.
///
/// The percentile uses the frame's source-valid depths only, so re-filtering
/// an already filtered map changes nothing.
pub fn filter_frame(frame: &PointMap, pose: &Se3, pelvis: Vec3, params: &FilterParams) -> PointMap {
    let world_to_cam = pose.inverse();
    let depths: Vec<f64> = frame
        .points
        .iter()
        .map(|&p| world_to_cam.transform_point(p).z)
        .collect();
    let mut sorted: Vec<f64> = depths
        .iter()
        .zip(&frame.valid)
        .filter(|(_, &ok)| ok)
        .map(|(&d, _)| d)
        .collect();
    sorted.sort_by(f64::total_cmp);
    let mut out = frame.clone();
    let Some(cutoff) = nearest_rank(&sorted, params.depth_percentile) else {
        return out;
    };
    let r2 = params.pelvis_radius * params.pelvis_radius;
    for i in 0..frame.len() {
        if !frame.valid[i] {
            continue;
        }
        if depths[i] > cutoff || frame.points[i].distance_squared(pelvis) > r2 {
            out.rejected[i] = true;
        }
    }
    out
}
