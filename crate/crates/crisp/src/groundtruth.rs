//! Ground-truth sidecar written next to synthetic datasets.

use std::fs;
use std::path::Path;

use crisp_core::evaluation::TriangleMesh;
use crisp_core::geometry::PlanarPrimitive;
use crisp_core::synth::{GroundTruth, Scenario};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primitives::to_obj;

pub const SIDECAR_DIR: &str = "ground_truth";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub scenario: Scenario,
    pub map_scale: f64,
    pub planes: Vec<PlanarPrimitive>,
    /// Indices of planes never rendered.
    pub hidden: Vec<usize>,
    /// `T×H×W` i32 plane index per pixel (negative: none).
    pub ids: String,
    /// `T×H×W` u8 outlier mask.
    pub outliers: String,
    /// Every plane, including hidden ones, as OBJ boxes.
    pub scene: String,
}

/// Writes the sidecar under `dataset_dir/ground_truth`.
pub fn write_ground_truth(gt: &GroundTruth, dataset_dir: &Path) -> Result<()> {
    let dir = dataset_dir.join(SIDECAR_DIR);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let ids: Vec<u8> = gt.ids.iter().flatten().flat_map(|v| v.to_le_bytes()).collect();
    let outliers: Vec<u8> = gt.outliers.iter().flatten().map(|&b| b as u8).collect();
    let sidecar = Sidecar {
        scenario: gt.scenario,
        map_scale: gt.map_scale,
        planes: gt.planes.clone(),
        hidden: gt.hidden.clone(),
        ids: "ids.i32".into(),
        outliers: "outliers.u8".into(),
        scene: "scene.obj".into(),
    };
    for (name, bytes) in [
        ("ids.i32", ids),
        ("outliers.u8", outliers),
        ("scene.obj", to_obj(&gt.planes).into_bytes()),
        (
            "ground_truth.json",
            serde_json::to_string_pretty(&sidecar).expect("sidecar serializes").into_bytes(),
        ),
    ] {
        let p = dir.join(name);
        fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}

/// Reads the sidecar; `frames`, `width`, `height` size the per-pixel grids.
pub fn read_ground_truth(dataset_dir: &Path, frames: usize, width: usize, height: usize) -> Result<GroundTruth> {
    let dir = dataset_dir.join(SIDECAR_DIR);
    let path = dir.join("ground_truth.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let s: Sidecar = serde_json::from_str(&text).map_err(|e| Error::parse(&path, e))?;
    let n = width * height;
    let ids_path = dir.join(&s.ids);
    let raw = fs::read(&ids_path).map_err(|e| Error::io(&ids_path, e))?;
    if raw.len() != frames * n * 4 {
        return Err(Error::shape(&ids_path, "plane id grid size"));
    }
    let ids: Vec<i32> = raw.chunks_exact(4).map(|c| i32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
    let out_path = dir.join(&s.outliers);
    let raw = fs::read(&out_path).map_err(|e| Error::io(&out_path, e))?;
    if raw.len() != frames * n {
        return Err(Error::shape(&out_path, "outlier mask size"));
    }
    Ok(GroundTruth {
        scenario: s.scenario,
        planes: s.planes,
        hidden: s.hidden,
        ids: ids.chunks_exact(n).map(<[i32]>::to_vec).collect(),
        outliers: raw.chunks_exact(n).map(|c| c.iter().map(|&b| b == 1).collect()).collect(),
        map_scale: s.map_scale,
    })
}

/// Mesh of every ground-truth plane.
pub fn scene_mesh(gt: &GroundTruth) -> TriangleMesh {
    TriangleMesh::from_primitives(&gt.planes)
}
