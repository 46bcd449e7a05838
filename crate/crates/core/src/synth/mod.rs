//! Synthetic oracle datasets: scripted scenes of planar slabs, camera
//! sweeps, ray-cast point maps, exact flows, and a kinematic body proxy
//! with contact traces.

pub mod body;
pub mod render;
pub mod scenes;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use body::{animate, body_box, Pose};
pub use render::{exact_flow, exact_flows, render_frame, render_pointmaps, BodyBox, FrameRender, ID_HUMAN, ID_NONE};

use crate::association::pair_schedule;
use crate::camera::{CameraTrack, Intrinsics};
use crate::data::{ContactSequence, Dataset, HumanDepth, MotionSequence, PointMap, PointMapSequence};
use crate::error::{Error, Result};
use crate::geometry::{PlanarPrimitive, Vec3};

/// Scene description for rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub primitives: Vec<PlanarPrimitive>,
    /// Indices of primitives that exist in the ground truth but are not rendered.
    pub hidden: Vec<usize>,
    pub cameras: CameraTrack,
    pub width: usize,
    pub height: usize,
    /// Depth noise standard deviation (m).
    pub sigma: f64,
    pub outlier_fraction: f64,
    pub seed: u64,
    /// Factor applied to rendered points, emulating an unknown map scale.
    pub map_scale: f64,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.primitives.is_empty() {
            return Err(Error::EmptySet("scene has no primitives"));
        }
        if self.cameras.poses.len() < 2 {
            return Err(Error::InvalidConfig("scene needs at least two camera frames"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidConfig("resolution must be positive"));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidConfig("sigma must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.outlier_fraction) {
            return Err(Error::InvalidConfig("outlier fraction must lie in [0, 1]"));
        }
        if !(self.map_scale > 0.0) || !self.map_scale.is_finite() {
            return Err(Error::InvalidConfig("map scale must be positive"));
        }
        if self.hidden.iter().any(|&h| h >= self.primitives.len()) {
            return Err(Error::InvalidConfig("hidden primitive index out of range"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Walk,
    Sit,
    Stairs,
    /// Cluttered 20-plane room.
    Room,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Walk => "walk",
            Scenario::Sit => "sit",
            Scenario::Stairs => "stairs",
            Scenario::Room => "room",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "walk" => Some(Scenario::Walk),
            "sit" => Some(Scenario::Sit),
            "stairs" => Some(Scenario::Stairs),
            "room" => Some(Scenario::Room),
            _ => None,
        }
    }

    /// Ground-truth primitives and the indices hidden from the cameras.
    /// The sit scene hides its seat unless `show_seat`.
    pub fn scene(self, show_seat: bool) -> (Vec<PlanarPrimitive>, Vec<usize>) {
        match self {
            Scenario::Walk => (scenes::walk_scene(), Vec::new()),
            Scenario::Stairs => (scenes::stairs_scene(), Vec::new()),
            Scenario::Room => (scenes::room_scene(), Vec::new()),
            Scenario::Sit => {
                let prims = scenes::sit_scene();
                let hidden = if show_seat { Vec::new() } else { alloc::vec![prims.len() - 1] };
                (prims, hidden)
            }
        }
    }

    pub fn cameras(self, frames: usize, width: usize, height: usize) -> CameraTrack {
        let f = 0.78 * width as f64;
        let intrinsics = Intrinsics {
            fx: f,
            fy: f,
            cx: 0.5 * (width as f64 - 1.0),
            cy: 0.5 * (height as f64 - 1.0),
        };
        let v = Vec3::new;
        let poses = match self {
            Scenario::Stairs => scenes::sweep(frames, v(-1.4, -0.6, 3.0), v(-0.4, -0.6, 3.0), v(0.0, 2.4, 0.3)),
            Scenario::Sit => scenes::sweep(frames, v(-1.2, -1.6, 1.9), v(1.0, -1.6, 1.9), v(0.0, 1.2, 0.4)),
            Scenario::Walk => scenes::sweep(frames, v(-1.0, -2.0, 1.8), v(1.0, -2.0, 1.8), v(0.0, 1.0, 0.5)),
            Scenario::Room => scenes::sweep(frames, v(-1.2, -2.0, 2.4), v(1.2, -2.0, 2.4), v(0.0, 1.0, 0.4)),
        };
        CameraTrack { intrinsics, poses }
    }

    pub fn poses(self, frames: usize) -> Vec<Pose> {
        match self {
            Scenario::Walk => scenes::walk_motion(frames),
            Scenario::Sit => scenes::sit_motion(frames),
            Scenario::Stairs => scenes::stairs_motion(frames),
            Scenario::Room => scenes::room_motion(frames),
        }
    }
}

/// Whether some primitive's observed face is horizontal, passes through
/// `p`, and contains it in its footprint.
fn has_surface_at(prims: &[PlanarPrimitive], p: Vec3) -> bool {
    prims.iter().any(|prim| {
        let n = prim.normal();
        if n.z.abs() < 1.0 - 1e-9 {
            return false;
        }
        let l = prim.to_local(p);
        let h = prim.half_extents();
        (l.z + h.z).abs() < 1e-6 && l.x.abs() <= h.x + 1e-9 && l.y.abs() <= h.y + 1e-9
    })
}

/// Scripted motion and contact trace for a scenario, checked against the
/// surfaces it touches.
pub fn synth_motion_and_contacts(
    primitives: &[PlanarPrimitive],
    scenario: Scenario,
    frames: usize,
    fps: f64,
) -> Result<(MotionSequence, ContactSequence, Vec<Pose>)> {
    let mismatch = |missing| Error::ScenarioMismatch {
        scenario: scenario.name(),
        missing,
    };
    match scenario {
        Scenario::Sit => {
            if !has_surface_at(primitives, scenes::SEAT_CENTER) {
                return Err(mismatch("seat"));
            }
        }
        Scenario::Stairs => {
            for k in 1..=scenes::STAIR_STEPS {
                let kf = k as f64;
                let p = Vec3::new(
                    0.0,
                    scenes::STAIR_START_Y + (kf - 0.5) * scenes::STAIR_RUN,
                    kf * scenes::STAIR_RISE,
                );
                if !has_surface_at(primitives, p) {
                    return Err(mismatch("tread"));
                }
            }
        }
        Scenario::Walk | Scenario::Room => {}
    }
    if !has_surface_at(primitives, Vec3::new(0.0, 0.3, 0.0)) {
        return Err(mismatch("ground"));
    }
    let poses = scenario.poses(frames);
    let (motion, contacts) = animate(&poses, fps);
    Ok((MotionSequence::new(fps, motion)?, ContactSequence::new(contacts)?, poses))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthOptions {
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub fps: f64,
    pub sigma: f64,
    pub outlier_fraction: f64,
    pub seed: u64,
    pub map_scale: f64,
    /// Frame strides for which flows are generated.
    pub strides: Vec<usize>,
    /// Render the seat of the sit scene instead of hiding it.
    pub show_seat: bool,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            frames: 100,
            width: 256,
            height: 256,
            fps: 30.0,
            sigma: 0.0,
            outlier_fraction: 0.0,
            seed: 0,
            map_scale: 1.0,
            strides: alloc::vec![1, 5],
            show_seat: false,
        }
    }
}

/// Ground truth that accompanies a generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub scenario: Scenario,
    pub planes: Vec<PlanarPrimitive>,
    pub hidden: Vec<usize>,
    /// Per frame, per pixel: primitive index, or a negative sentinel.
    pub ids: Vec<Vec<i32>>,
    pub outliers: Vec<Vec<bool>>,
    pub map_scale: f64,
}

impl GroundTruth {
    /// Indices of rendered primitives seen by at least `min_pixels` pixels in some frame.
    pub fn visible_planes(&self, min_pixels: usize) -> Vec<usize> {
        (0..self.planes.len())
            .filter(|&p| {
                self.ids
                    .iter()
                    .any(|f| f.iter().filter(|&&id| id == p as i32).count() >= min_pixels)
            })
            .collect()
    }
}

pub fn scene_spec(scenario: Scenario, opts: &SynthOptions) -> SceneSpec {
    let (primitives, hidden) = scenario.scene(opts.show_seat);
    SceneSpec {
        primitives,
        hidden,
        cameras: scenario.cameras(opts.frames, opts.width, opts.height),
        width: opts.width,
        height: opts.height,
        sigma: opts.sigma,
        outlier_fraction: opts.outlier_fraction,
        seed: opts.seed,
        map_scale: opts.map_scale,
    }
}

/// Renders a full dataset and its ground truth.
pub fn generate(scenario: Scenario, opts: &SynthOptions) -> Result<(Dataset, GroundTruth)> {
    let spec = scene_spec(scenario, opts);
    spec.validate()?;
    let (motion, contacts, poses) = synth_motion_and_contacts(&spec.primitives, scenario, opts.frames, opts.fps)?;
    let bodies: Vec<Option<BodyBox>> = poses
        .iter()
        .map(|p| {
            let (rotation, center, half) = body_box(p);
            Some(BodyBox { rotation, center, half })
        })
        .collect();
    let renders = render_pointmaps(&spec, &bodies);
    let pairs = pair_schedule(opts.frames, &opts.strides);
    let flows = exact_flows(&spec, &renders, &bodies, &pairs);

    let mut frames = Vec::with_capacity(renders.len());
    let mut human = Vec::with_capacity(renders.len());
    let mut ids = Vec::with_capacity(renders.len());
    let mut outliers = Vec::with_capacity(renders.len());
    for r in renders {
        frames.push(PointMap::new(spec.width, spec.height, r.points, r.valid)?);
        human.push(HumanDepth {
            width: spec.width,
            height: spec.height,
            depth: r.human_depth,
        });
        ids.push(r.ids);
        outliers.push(r.outlier);
    }
    let dataset = Dataset {
        points: PointMapSequence::new(frames)?,
        flows,
        motion,
        contacts,
        cameras: spec.cameras.scaled(spec.map_scale),
        human: Some(human),
    };
    dataset.validate()?;
    let truth = GroundTruth {
        scenario,
        planes: spec.primitives,
        hidden: spec.hidden,
        ids,
        outliers,
        map_scale: spec.map_scale,
    };
    Ok((dataset, truth))
}
