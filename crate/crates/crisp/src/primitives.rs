//! Primitive lists on disk: the JSON record written by `fit`, OBJ boxes and
//! the simulator manifest written by `export`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crisp_core::config::PipelineConfig;
use crisp_core::geometry::{Mat3, PlanarPrimitive, Provenance, UnitQuat, Vec3};
use crisp_core::primitive_fit::FittedPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PRIMITIVES_FORMAT: &str = "crisp-primitives";
pub const SIM_MANIFEST_FORMAT: &str = "crisp-sim-manifest";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    /// `[w, x, y, z]`.
    pub quat: [f64; 4],
    /// Row-major; columns are the in-plane axes and the extrusion normal.
    pub matrix: [[f64; 3]; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveRecord {
    pub id: usize,
    /// Association group the primitive was fitted to; absent for
    /// contact-completed primitives.
    pub group: Option<usize>,
    pub provenance: Provenance,
    pub rotation: Rotation,
    pub center: [f64; 3],
    /// Full side lengths.
    pub extents: [f64; 3],
    pub inlier_count: usize,
    /// RMS point-to-plane distance of the inliers (m).
    pub residual: f64,
}

impl PrimitiveRecord {
    pub fn new(id: usize, f: &FittedPrimitive) -> Self {
        let p = &f.primitive;
        PrimitiveRecord {
            id,
            group: f.group,
            provenance: p.provenance,
            rotation: Rotation {
                quat: UnitQuat::from_matrix(&p.rotation).to_array(),
                matrix: p.rotation.into(),
            },
            center: p.center.to_array(),
            extents: p.extents.to_array(),
            inlier_count: f.inlier_count,
            residual: f.residual,
        }
    }

    /// The primitive, rebuilt from the stored matrix.
    pub fn primitive(&self) -> crisp_core::Result<PlanarPrimitive> {
        PlanarPrimitive::new(
            Mat3::from(self.rotation.matrix),
            self.center.into(),
            self.extents.into(),
            self.provenance,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveFile {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
    pub config: PipelineConfig,
    /// Scale applied to the input point maps.
    pub scale: f64,
    pub primitives: Vec<PrimitiveRecord>,
}

impl PrimitiveFile {
    pub fn new(config: &PipelineConfig, scale: f64, fitted: &[FittedPrimitive]) -> Self {
        PrimitiveFile {
            format: PRIMITIVES_FORMAT.into(),
            version: 1,
            config_hash: config_hash(config),
            config: config.clone(),
            scale,
            primitives: fitted.iter().enumerate().map(|(i, f)| PrimitiveRecord::new(i, f)).collect(),
        }
    }

    pub fn primitives(&self) -> crisp_core::Result<Vec<PlanarPrimitive>> {
        self.primitives.iter().map(PrimitiveRecord::primitive).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("primitive file serializes");
        s.push('\n');
        s
    }
}

/// Hex SHA-256 of the config's compact JSON serialization.
pub fn config_hash(config: &PipelineConfig) -> String {
    use sha2::{Digest, Sha256};
    let json = serde_json::to_string(config).expect("config serializes");
    hex::encode(Sha256::digest(json.as_bytes()))
}

pub fn read_primitive_file(path: &Path) -> Result<PrimitiveFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let f: PrimitiveFile = serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
    if f.format != PRIMITIVES_FORMAT {
        return Err(Error::parse(path, format!("format is `{}`, expected `{PRIMITIVES_FORMAT}`", f.format)));
    }
    f.primitives().map_err(|e| Error::parse(path, e))?;
    Ok(f)
}

/// One object of 8 vertices and 12 triangles per primitive.
pub fn to_obj(prims: &[PlanarPrimitive]) -> String {
    let mut s = String::new();
    for (i, p) in prims.iter().enumerate() {
        let _ = writeln!(s, "o primitive_{i}");
        for c in p.corners() {
            let _ = writeln!(s, "v {} {} {}", c.x, c.y, c.z);
        }
        let base = 8 * i + 1;
        for t in PlanarPrimitive::triangles() {
            let _ = writeln!(s, "f {} {} {}", base + t[0], base + t[1], base + t[2]);
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimBox {
    pub name: String,
    /// `[w, x, y, z]`.
    pub quat: [f64; 4],
    pub translation: [f64; 3],
    pub half_extents: [f64; 3],
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimManifest {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
    pub boxes: Vec<SimBox>,
}

impl SimManifest {
    pub fn new(file: &PrimitiveFile) -> crisp_core::Result<Self> {
        let boxes = file
            .primitives
            .iter()
            .map(|r| {
                let p = r.primitive()?;
                Ok(SimBox {
                    name: format!("primitive_{}", r.id),
                    quat: r.rotation.quat,
                    translation: r.center,
                    half_extents: p.half_extents().to_array(),
                    provenance: r.provenance,
                })
            })
            .collect::<crisp_core::Result<Vec<_>>>()?;
        Ok(SimManifest {
            format: SIM_MANIFEST_FORMAT.into(),
            version: 1,
            config_hash: file.config_hash.clone(),
            boxes,
        })
    }

    pub fn primitives(&self) -> crisp_core::Result<Vec<PlanarPrimitive>> {
        self.boxes
            .iter()
            .map(|b| {
                let q = b.quat;
                let r = UnitQuat::new(q[0], q[1], q[2], q[3])?.to_matrix();
                PlanarPrimitive::new(r, b.translation.into(), Vec3::from(b.half_extents) * 2.0, b.provenance)
            })
            .collect()
    }
}

pub fn read_sim_manifest(path: &Path) -> Result<SimManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let m: SimManifest = serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
    if m.format != SIM_MANIFEST_FORMAT {
        return Err(Error::parse(path, format!("format is `{}`, expected `{SIM_MANIFEST_FORMAT}`", m.format)));
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Obj,
    SimManifest,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "obj" => Ok(ExportFormat::Obj),
            "sim-manifest" => Ok(ExportFormat::SimManifest),
            other => Err(Error::UnknownFormat(other.into())),
        }
    }
}

/// Writes the export into `dir` and returns the written path.
pub fn export(file: &PrimitiveFile, format: ExportFormat, dir: &Path) -> Result<std::path::PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (path, text) = match format {
        ExportFormat::Obj => (dir.join("primitives.obj"), to_obj(&file.primitives()?)),
        ExportFormat::SimManifest => {
            let m = SimManifest::new(file)?;
            let mut s = serde_json::to_string_pretty(&m).expect("manifest serializes");
            s.push('\n');
            (dir.join("sim_manifest.json"), s)
        }
    };
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
