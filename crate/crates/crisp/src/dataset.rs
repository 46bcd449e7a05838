//! Dataset directories: a JSON manifest plus raw little-endian binaries,
//! a motion text file and a contact JSON-lines file.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crisp_core::camera::{CameraTrack, Intrinsics};
use crisp_core::data::{
    Contact, ContactFrame, ContactSequence, Dataset, FlowField, HumanDepth, JointState, MotionFrame, MotionSequence,
    PointMap, PointMapSequence,
};
use crisp_core::geometry::{Se3, UnitQuat, Vec2, Vec3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MANIFEST: &str = "manifest.json";
pub const DATASET_FORMAT: &str = "crisp-dataset";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    pub joints: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowEntry {
    pub source: usize,
    pub target: usize,
    /// `H×W×2` f32 pixel displacements.
    pub flow: String,
    /// `H×W` u8 mask.
    pub covisibility: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    /// Camera-to-world rotation `[w, x, y, z]`.
    pub quat: [f64; 4],
    pub translation: [f64; 3],
    /// Body speed (m/s).
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub dims: Dims,
    pub fps: f64,
    /// Row-major 3×3 camera matrix.
    pub intrinsics: [[f64; 3]; 3],
    /// `T×H×W×3` f32 world points, frame-major.
    pub points: String,
    /// `T×H×W` u8 validity mask.
    pub valid: String,
    /// `T×H×W` f32 rendered human depth along the optical axis; 0 where no
    /// human is seen.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub human_depth: Option<String>,
    pub motion: String,
    pub contacts: String,
    pub flows: Vec<FlowEntry>,
    pub frames: Vec<FrameRecord>,
}

fn read_bytes(path: &Path, expected: usize) -> Result<Vec<u8>> {
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::shape(path, "referenced file is missing"),
        _ => Error::io(path, e),
    })?;
    if bytes.len() != expected {
        return Err(Error::shape(path, format!("expected {expected} bytes, found {}", bytes.len())));
    }
    Ok(bytes)
}

fn read_f32(path: &Path, count: usize) -> Result<Vec<f32>> {
    let bytes = read_bytes(path, count * 4)?;
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

fn read_mask(path: &Path, count: usize) -> Result<Vec<bool>> {
    let bytes = read_bytes(path, count)?;
    if bytes.iter().any(|&b| b > 1) {
        return Err(Error::shape(path, "mask bytes must be 0 or 1"));
    }
    Ok(bytes.into_iter().map(|b| b == 1).collect())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn f32_bytes(values: impl Iterator<Item = f64>) -> Vec<u8> {
    values.flat_map(|v| (v as f32).to_le_bytes()).collect()
}

fn mask_bytes<'a>(values: impl Iterator<Item = &'a bool>) -> Vec<u8> {
    values.map(|&b| b as u8).collect()
}

/// Attaches the offending file to a core validation error.
fn core_err(path: &Path) -> impl Fn(crisp_core::Error) -> Error + '_ {
    move |e| match e {
        crisp_core::Error::NonFinite(m) => Error::NonFiniteData {
            path: path.to_path_buf(),
            msg: m.to_string(),
        },
        other => Error::shape(path, other),
    }
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::parse(path, e))?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
    if m.format != DATASET_FORMAT {
        return Err(Error::parse(path, format!("format is `{}`, expected `{DATASET_FORMAT}`", m.format)));
    }
    if m.dims.frames == 0 || m.frames.is_empty() {
        return Err(Error::parse(path, "empty frame list"));
    }
    if m.frames.len() != m.dims.frames {
        return Err(Error::parse(path, format!("{} frame records for {} frames", m.frames.len(), m.dims.frames)));
    }
    if m.dims.width == 0 || m.dims.height == 0 || m.dims.joints == 0 {
        return Err(Error::parse(path, "zero width, height or joint count"));
    }
    Ok(m)
}

/// Loads and validates the dataset whose manifest is at `path`; a directory
/// is taken to contain `manifest.json`.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let manifest_path = if path.is_dir() { path.join(MANIFEST) } else { path.to_path_buf() };
    let m = read_manifest(&manifest_path)?;
    let dir = manifest_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let Dims {
        frames: t,
        height: h,
        width: w,
        joints,
    } = m.dims;
    let n = w * h;

    let points_path = dir.join(&m.points);
    let raw = read_f32(&points_path, t * n * 3)?;
    let valid_path = dir.join(&m.valid);
    let valid = read_mask(&valid_path, t * n)?;
    let mut frames = Vec::with_capacity(t);
    for f in 0..t {
        let pts: Vec<Vec3> = raw[f * n * 3..(f + 1) * n * 3]
            .chunks_exact(3)
            .map(|c| Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64))
            .collect();
        let v = valid[f * n..(f + 1) * n].to_vec();
        frames.push(PointMap::new(w, h, pts, v).map_err(core_err(&points_path))?);
    }
    let points = PointMapSequence::new(frames).map_err(core_err(&points_path))?;

    let human = match &m.human_depth {
        Some(rel) => {
            let p = dir.join(rel);
            let d = read_f32(&p, t * n)?;
            if d.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::NonFiniteData {
                    path: p,
                    msg: "human depth must be finite and non-negative".into(),
                });
            }
            Some(
                d.chunks_exact(n)
                    .map(|c| HumanDepth {
                        width: w,
                        height: h,
                        depth: c.iter().map(|&v| v as f64).collect(),
                    })
                    .collect(),
            )
        }
        None => None,
    };

    let mut flows = Vec::with_capacity(m.flows.len());
    for e in &m.flows {
        let fp = dir.join(&e.flow);
        let raw = read_f32(&fp, n * 2)?;
        let cp = dir.join(&e.covisibility);
        let covis = read_mask(&cp, n)?;
        let flow = raw.chunks_exact(2).map(|c| Vec2::new(c[0] as f64, c[1] as f64)).collect();
        flows.push(FlowField::new(e.source, e.target, w, h, flow, covis).map_err(core_err(&fp))?);
    }

    let motion_path = dir.join(&m.motion);
    let motion = read_motion(&motion_path, m.fps)?;
    if motion.len() != t || motion.joint_count() != joints {
        return Err(Error::shape(
            &motion_path,
            format!("{} frames of {} joints, manifest declares {t} of {joints}", motion.len(), motion.joint_count()),
        ));
    }

    let contacts_path = dir.join(&m.contacts);
    let speeds: Vec<f64> = m.frames.iter().map(|f| f.speed).collect();
    let contacts = read_contacts(&contacts_path, &speeds)?;

    let k = Intrinsics::from_matrix(&m.intrinsics.into()).map_err(|e| Error::parse(&manifest_path, e))?;
    let poses = m
        .frames
        .iter()
        .map(|f| {
            let q = f.quat;
            let rot = UnitQuat::new(q[0], q[1], q[2], q[3]).map_err(|e| Error::parse(&manifest_path, e))?;
            let tr = Vec3::from(f.translation);
            if !tr.is_finite() {
                return Err(Error::NonFiniteData {
                    path: manifest_path.clone(),
                    msg: "camera translation".into(),
                });
            }
            Ok(Se3::new(rot, tr))
        })
        .collect::<Result<Vec<_>>>()?;
    let dataset = Dataset {
        points,
        flows,
        motion,
        contacts,
        cameras: CameraTrack { intrinsics: k, poses },
        human,
    };
    dataset.validate().map_err(core_err(&manifest_path))?;
    Ok(dataset)
}

/// Writes `dataset` into `dir` (created if needed) and returns the manifest
/// path.
pub fn save_dataset(dataset: &Dataset, dir: &Path) -> Result<PathBuf> {
    dataset.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let pts = &dataset.points;
    let t = pts.len();

    write_file(
        &dir.join("points.f32"),
        &f32_bytes(pts.frames.iter().flat_map(|f| f.points.iter().flat_map(|p| p.to_array()))),
    )?;
    write_file(&dir.join("valid.u8"), &mask_bytes(pts.frames.iter().flat_map(|f| f.valid.iter())))?;
    let human_depth = match &dataset.human {
        Some(h) => {
            write_file(&dir.join("human_depth.f32"), &f32_bytes(h.iter().flat_map(|d| d.depth.iter().copied())))?;
            Some("human_depth.f32".to_string())
        }
        None => None,
    };
    let flow_dir = dir.join("flows");
    if !dataset.flows.is_empty() {
        fs::create_dir_all(&flow_dir).map_err(|e| Error::io(&flow_dir, e))?;
    }
    let mut flows = Vec::with_capacity(dataset.flows.len());
    for f in &dataset.flows {
        let stem = format!("{:05}_{:05}", f.source, f.target);
        let flow = format!("flows/{stem}.flow.f32");
        let covisibility = format!("flows/{stem}.covis.u8");
        write_file(&dir.join(&flow), &f32_bytes(f.flow.iter().flat_map(|v| [v.x, v.y])))?;
        write_file(&dir.join(&covisibility), &mask_bytes(f.covisible.iter()))?;
        flows.push(FlowEntry {
            source: f.source,
            target: f.target,
            flow,
            covisibility,
        });
    }
    write_motion(&dataset.motion, &dir.join("motion.txt"))?;
    write_contacts(&dataset.contacts, &dir.join("contacts.jsonl"))?;

    let manifest = Manifest {
        format: DATASET_FORMAT.into(),
        version: 1,
        dims: Dims {
            frames: t,
            height: pts.height,
            width: pts.width,
            joints: dataset.motion.joint_count(),
        },
        fps: dataset.motion.fps,
        intrinsics: dataset.cameras.intrinsics.to_matrix().into(),
        points: "points.f32".into(),
        valid: "valid.u8".into(),
        human_depth,
        motion: "motion.txt".into(),
        contacts: "contacts.jsonl".into(),
        flows,
        frames: dataset
            .cameras
            .poses
            .iter()
            .zip(&dataset.contacts.frames)
            .map(|(p, c)| FrameRecord {
                quat: p.rotation.to_array(),
                translation: p.translation.to_array(),
                speed: c.speed,
            })
            .collect(),
    };
    let path = dir.join(MANIFEST);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&path, text.as_bytes())?;
    Ok(path)
}

/// Motion text: optional `#` comment lines, then per frame the root pose
/// (quaternion `w x y z`, translation) followed by, per joint, position,
/// orientation `w x y z`, linear and angular velocity.
pub fn read_motion(path: &Path, fps: f64) -> Result<MotionSequence> {
    let file = fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::shape(path, "referenced file is missing"),
        _ => Error::io(path, e),
    })?;
    let mut frames = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: String| Error::parse(path, format!("line {}: {msg}", lineno + 1));
        let v = line
            .split_whitespace()
            .map(|s| s.parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if v.len() < 7 || (v.len() - 7) % 13 != 0 {
            return Err(bad(format!("{} values is not 7 + 13·J", v.len())));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteData {
                path: path.to_path_buf(),
                msg: format!("line {}", lineno + 1),
            });
        }
        let quat = |s: &[f64]| UnitQuat::new(s[0], s[1], s[2], s[3]).map_err(|e| bad(e.to_string()));
        let v3 = |s: &[f64]| Vec3::new(s[0], s[1], s[2]);
        let root = Se3::new(quat(&v[0..4])?, v3(&v[4..7]));
        let joints = v[7..]
            .chunks_exact(13)
            .map(|c| {
                Ok(JointState {
                    position: v3(&c[0..3]),
                    orientation: quat(&c[3..7])?,
                    linear_velocity: v3(&c[7..10]),
                    angular_velocity: v3(&c[10..13]),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        frames.push(MotionFrame { root, joints });
    }
    MotionSequence::new(fps, frames).map_err(core_err(path))
}

pub fn write_motion(motion: &MotionSequence, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "# fps {} joints {}", motion.fps, motion.joint_count())?;
        for f in &motion.frames {
            let mut vals: Vec<f64> = Vec::with_capacity(7 + 13 * f.joints.len());
            vals.extend(f.root.rotation.to_array());
            vals.extend(f.root.translation.to_array());
            for j in &f.joints {
                vals.extend(j.position.to_array());
                vals.extend(j.orientation.to_array());
                vals.extend(j.linear_velocity.to_array());
                vals.extend(j.angular_velocity.to_array());
            }
            let line: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

/// Reads a motion file on its own, taking the frame rate from its
/// `# fps` header or else `default_fps`.
pub fn read_motion_file(path: &Path, default_fps: f64) -> Result<MotionSequence> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let fps = text
        .lines()
        .take_while(|l| l.trim_start().starts_with('#'))
        .find_map(|l| {
            let mut it = l.trim_start_matches('#').split_whitespace();
            while let Some(tok) = it.next() {
                if tok == "fps" {
                    return it.next().and_then(|v| v.parse::<f64>().ok());
                }
            }
            None
        })
        .unwrap_or(default_fps);
    read_motion(path, fps)
}

/// One JSON array of `{vertex_id, confidence, xyz}` per line and frame.
pub fn read_contacts(path: &Path, speeds: &[f64]) -> Result<ContactSequence> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::shape(path, "referenced file is missing"),
        _ => Error::io(path, e),
    })?;
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.len() != speeds.len() {
        return Err(Error::shape(path, format!("{} lines for {} frames", lines.len(), speeds.len())));
    }
    let frames = lines
        .iter()
        .zip(speeds)
        .enumerate()
        .map(|(i, (l, &speed))| {
            let contacts: Vec<Contact> =
                serde_json::from_str(l).map_err(|e| Error::parse(path, format!("line {}: {e}", i + 1)))?;
            Ok(ContactFrame { speed, contacts })
        })
        .collect::<Result<Vec<_>>>()?;
    ContactSequence::new(frames).map_err(core_err(path))
}

pub fn write_contacts(contacts: &ContactSequence, path: &Path) -> Result<()> {
    let mut text = String::new();
    for f in &contacts.frames {
        text.push_str(&serde_json::to_string(&f.contacts).expect("contacts serialize"));
        text.push('\n');
    }
    write_file(path, text.as_bytes())
}
