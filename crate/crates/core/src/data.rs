//! In-memory dataset types shared by every pipeline stage.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::camera::CameraTrack;
use crate::error::{Error, Result};
use crate::geometry::{Se3, UnitQuat, Vec2, Vec3};

/// One organized `H×W` point grid in world coordinates.
///
/// `valid` is the source validity mask. `rejected` collects pixels removed by
/// later stages (human pixels, spatial filters); a pixel is usable only when
/// valid and not rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMap {
    pub width: usize,
    pub height: usize,
    pub points: Vec<Vec3>,
    pub valid: Vec<bool>,
    pub rejected: Vec<bool>,
}

impl PointMap {
    pub fn new(width: usize, height: usize, points: Vec<Vec3>, valid: Vec<bool>) -> Result<Self> {
        let n = width * height;
        if points.len() != n || valid.len() != n {
            return Err(Error::ShapeMismatch("point map grid size"));
        }
        if points.iter().zip(&valid).any(|(p, &ok)| ok && !p.is_finite()) {
            return Err(Error::NonFinite("valid point-map entry"));
        }
        Ok(Self {
            width,
            height,
            points,
            valid,
            rejected: alloc::vec![false; n],
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    #[inline]
    pub fn usable(&self, i: usize) -> bool {
        self.valid[i] && !self.rejected[i]
    }

    pub fn usable_count(&self) -> usize {
        (0..self.len()).filter(|&i| self.usable(i)).count()
    }
}

/// `T` point maps sharing one resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMapSequence {
    pub width: usize,
    pub height: usize,
    pub frames: Vec<PointMap>,
}

impl PointMapSequence {
    pub fn new(frames: Vec<PointMap>) -> Result<Self> {
        let first = frames.first().ok_or(Error::EmptySet("point map sequence has no frames"))?;
        let (width, height) = (first.width, first.height);
        if frames.iter().any(|f| f.width != width || f.height != height) {
            return Err(Error::ShapeMismatch("frames differ in resolution"));
        }
        Ok(Self {
            width,
            height,
            frames,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Multiplies every point by `s`.
    pub fn scale(&mut self, s: f64) {
        for f in &mut self.frames {
            for p in &mut f.points {
                *p = *p * s;
            }
        }
    }
}

/// Dense pixel displacement from frame `source` to frame `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    pub source: usize,
    pub target: usize,
    pub width: usize,
    pub height: usize,
    pub flow: Vec<Vec2>,
    pub covisible: Vec<bool>,
}

impl FlowField {
    pub fn new(
        source: usize,
        target: usize,
        width: usize,
        height: usize,
        flow: Vec<Vec2>,
        covisible: Vec<bool>,
    ) -> Result<Self> {
        if source == target {
            return Err(Error::ShapeMismatch("flow source and target frames are equal"));
        }
        let n = width * height;
        if flow.len() != n || covisible.len() != n {
            return Err(Error::ShapeMismatch("flow grid size"));
        }
        if flow
            .iter()
            .zip(&covisible)
            .any(|(f, &c)| c && !(f.x.is_finite() && f.y.is_finite()))
        {
            return Err(Error::NonFinite("covisible flow vector"));
        }
        Ok(Self {
            source,
            target,
            width,
            height,
            flow,
            covisible,
        })
    }
}

/// Rendered human depth along the optical axis, one grid per frame; zero
/// where no human is visible.
#[derive(Debug, Clone, PartialEq)]
pub struct HumanDepth {
    pub width: usize,
    pub height: usize,
    pub depth: Vec<f64>,
}

impl HumanDepth {
    #[inline]
    pub fn is_human(&self, i: usize) -> bool {
        self.depth[i] > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointState {
    pub position: Vec3,
    pub orientation: UnitQuat,
    pub linear_velocity: Vec3,
    pub angular_velocity: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionFrame {
    pub root: Se3,
    pub joints: Vec<JointState>,
}

impl MotionFrame {
    /// Joint 0 is the pelvis.
    #[inline]
    pub fn pelvis(&self) -> Vec3 {
        self.joints[0].position
    }

    pub fn positions(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.joints.iter().map(|j| j.position)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionSequence {
    pub fps: f64,
    pub frames: Vec<MotionFrame>,
}

impl MotionSequence {
    pub fn new(fps: f64, frames: Vec<MotionFrame>) -> Result<Self> {
        let j = frames.first().map(|f| f.joints.len()).unwrap_or(0);
        if j == 0 {
            return Err(Error::EmptySet("motion has no frames or no joints"));
        }
        if !(fps > 0.0) {
            return Err(Error::InvalidConfig("fps must be positive"));
        }
        for f in &frames {
            if f.joints.len() != j {
                return Err(Error::ShapeMismatch("joint count changes across frames"));
            }
            let finite = f.root.translation.is_finite()
                && f.joints.iter().all(|s| {
                    s.position.is_finite() && s.linear_velocity.is_finite() && s.angular_velocity.is_finite()
                });
            if !finite {
                return Err(Error::NonFinite("motion frame"));
            }
        }
        Ok(Self { fps, frames })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn joint_count(&self) -> usize {
        self.frames[0].joints.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub vertex_id: u32,
    pub confidence: f64,
    #[serde(rename = "xyz")]
    pub position: Vec3,
}

/// Per-frame contact predictions plus the body speed `v_t` (m/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactFrame {
    pub speed: f64,
    pub contacts: Vec<Contact>,
}

impl ContactFrame {
    pub fn max_confidence(&self) -> f64 {
        self.contacts.iter().map(|c| c.confidence).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ContactSequence {
    pub frames: Vec<ContactFrame>,
}

impl ContactSequence {
    pub fn new(frames: Vec<ContactFrame>) -> Result<Self> {
        for f in &frames {
            if !f.speed.is_finite() || f.speed < 0.0 {
                return Err(Error::NonFinite("body speed"));
            }
            for c in &f.contacts {
                if !(0.0..=1.0).contains(&c.confidence) {
                    return Err(Error::InvalidConfig("contact confidence outside [0, 1]"));
                }
                if !c.position.is_finite() {
                    return Err(Error::NonFinite("contact position"));
                }
            }
        }
        Ok(Self { frames })
    }
}

/// Everything the fitting pipeline consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub points: PointMapSequence,
    pub flows: Vec<FlowField>,
    pub motion: MotionSequence,
    pub contacts: ContactSequence,
    pub cameras: CameraTrack,
    pub human: Option<Vec<HumanDepth>>,
}

impl Dataset {
    /// Cross-checks frame counts and resolutions of all parts.
    pub fn validate(&self) -> Result<()> {
        let t = self.points.len();
        let (w, h) = (self.points.width, self.points.height);
        if self.motion.len() != t {
            return Err(Error::ShapeMismatch("motion frame count differs from point maps"));
        }
        if self.contacts.frames.len() != t {
            return Err(Error::ShapeMismatch("contact frame count differs from point maps"));
        }
        if self.cameras.poses.len() != t {
            return Err(Error::ShapeMismatch("camera pose count differs from point maps"));
        }
        for f in &self.flows {
            if f.width != w || f.height != h {
                return Err(Error::ShapeMismatch("flow resolution differs from point maps"));
            }
            if f.source >= t || f.target >= t {
                return Err(Error::ShapeMismatch("flow references a frame out of range"));
            }
        }
        if let Some(human) = &self.human {
            if human.len() != t || human.iter().any(|d| d.width != w || d.height != h || d.depth.len() != w * h) {
                return Err(Error::ShapeMismatch("human depth shape"));
            }
        }
        Ok(())
    }
}
