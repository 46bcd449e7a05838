//! Triangle-mesh readers for ground-truth scenes.

use std::fs;
use std::io::BufReader;
use std::path::Path;

use crisp_core::evaluation::TriangleMesh;
use crisp_core::geometry::Vec3;
use ply_rs::parser::Parser;
use ply_rs::ply::{DefaultElement, Property};

use crate::error::{Error, Result};

/// Reads an OBJ or PLY mesh, chosen by extension. Polygons are fanned into
/// triangles.
pub fn read_mesh(path: &Path) -> Result<TriangleMesh> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    let mesh = match ext.as_deref() {
        Some("obj") => read_obj(path)?,
        Some("ply") => read_ply(path)?,
        _ => return Err(Error::UnknownFormat(path.display().to_string())),
    };
    mesh.validate().map_err(|e| Error::parse(path, e))?;
    Ok(mesh)
}

pub fn read_obj(path: &Path) -> Result<TriangleMesh> {
    let opts = tobj::LoadOptions {
        triangulate: true,
        single_index: false,
        ignore_points: true,
        ignore_lines: true,
    };
    let (models, _) = tobj::load_obj(path, &opts).map_err(|e| Error::parse(path, e))?;
    let mut mesh = TriangleMesh::default();
    for m in models {
        let base = mesh.vertices.len() as u32;
        mesh.vertices.extend(
            m.mesh
                .positions
                .chunks_exact(3)
                .map(|c| Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64)),
        );
        mesh.triangles
            .extend(m.mesh.indices.chunks_exact(3).map(|t| [base + t[0], base + t[1], base + t[2]]));
    }
    Ok(mesh)
}

fn scalar(p: &Property) -> Option<f64> {
    Some(match *p {
        Property::Float(v) => v as f64,
        Property::Double(v) => v,
        Property::Char(v) => v as f64,
        Property::UChar(v) => v as f64,
        Property::Short(v) => v as f64,
        Property::UShort(v) => v as f64,
        Property::Int(v) => v as f64,
        Property::UInt(v) => v as f64,
        _ => return None,
    })
}

fn index_list(p: &Property) -> Option<Vec<u32>> {
    match p {
        Property::ListInt(v) => v.iter().map(|&i| u32::try_from(i).ok()).collect(),
        Property::ListUInt(v) => Some(v.clone()),
        Property::ListShort(v) => v.iter().map(|&i| u32::try_from(i).ok()).collect(),
        Property::ListUShort(v) => Some(v.iter().map(|&i| i as u32).collect()),
        Property::ListChar(v) => v.iter().map(|&i| u32::try_from(i).ok()).collect(),
        Property::ListUChar(v) => Some(v.iter().map(|&i| i as u32).collect()),
        _ => None,
    }
}

/// ASCII or binary PLY with `vertex (x, y, z)` and `face (vertex_indices)`.
pub fn read_ply(path: &Path) -> Result<TriangleMesh> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let ply = Parser::<DefaultElement>::new()
        .read_ply(&mut BufReader::new(file))
        .map_err(|e| Error::parse(path, e))?;
    let mut mesh = TriangleMesh::default();
    let vertices = ply.payload.get("vertex").ok_or_else(|| Error::parse(path, "no vertex element"))?;
    for v in vertices {
        let get = |k: &str| v.get(k).and_then(scalar).ok_or_else(|| Error::parse(path, format!("vertex lacks `{k}`")));
        mesh.vertices.push(Vec3::new(get("x")?, get("y")?, get("z")?));
    }
    for f in ply.payload.get("face").map(Vec::as_slice).unwrap_or_default() {
        let idx = f
            .get("vertex_indices")
            .or_else(|| f.get("vertex_index"))
            .and_then(index_list)
            .ok_or_else(|| Error::parse(path, "face lacks a vertex index list"))?;
        for k in 1..idx.len().saturating_sub(1) {
            mesh.triangles.push([idx[0], idx[k], idx[k + 1]]);
        }
    }
    Ok(mesh)
}

/// Writes an ASCII PLY.
pub fn write_ply(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    use std::fmt::Write as _;
    let mut s = String::new();
    let _ = write!(
        s,
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\n\
         element face {}\nproperty list uchar int vertex_indices\nend_header\n",
        mesh.vertices.len(),
        mesh.triangles.len()
    );
    for v in &mesh.vertices {
        let _ = writeln!(s, "{} {} {}", v.x, v.y, v.z);
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}
