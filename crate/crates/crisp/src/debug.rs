//! Intermediate dumps: per-frame segment label images and tables, group
//! membership and association edges.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crisp_core::association::SegmentGraph;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Serialize)]
struct SegmentRow {
    id: usize,
    frame: usize,
    size: usize,
    group: usize,
    mean_normal: [f64; 3],
    centroid: [f64; 3],
}

/// Binary PGM; 0 is unsegmented, segment `k` of the frame is `k + 1`
/// (saturating at 255).
pub fn label_pgm(width: usize, height: usize, segments: &[&[u32]]) -> Vec<u8> {
    let mut img = vec![0u8; width * height];
    for (k, members) in segments.iter().enumerate() {
        let v = (k + 1).min(255) as u8;
        for &m in *members {
            img[m as usize] = v;
        }
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(img);
    out
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn dump(dir: &Path, graph: &SegmentGraph, width: usize, height: usize, frames: usize) -> Result<()> {
    let seg_dir = dir.join("segments");
    fs::create_dir_all(&seg_dir).map_err(|e| Error::io(&seg_dir, e))?;
    let mut per_frame: Vec<Vec<usize>> = vec![Vec::new(); frames];
    for (i, s) in graph.nodes.iter().enumerate() {
        per_frame[s.frame].push(i);
    }
    for (t, nodes) in per_frame.iter().enumerate() {
        let members: Vec<&[u32]> = nodes.iter().map(|&i| graph.nodes[i].members.as_slice()).collect();
        write(&seg_dir.join(format!("labels_{t:05}.pgm")), label_pgm(width, height, &members))?;
        let rows: Vec<SegmentRow> = nodes
            .iter()
            .map(|&i| {
                let s = &graph.nodes[i];
                SegmentRow {
                    id: i,
                    frame: s.frame,
                    size: s.len(),
                    group: graph.groups[i],
                    mean_normal: s.mean_normal.to_array(),
                    centroid: s.centroid.to_array(),
                }
            })
            .collect();
        let json = serde_json::to_string_pretty(&rows).expect("segment rows serialize");
        write(&seg_dir.join(format!("segments_{t:05}.json")), json)?;
    }
    let mut groups = String::from("frame,segment,group\n");
    for (i, s) in graph.nodes.iter().enumerate() {
        let _ = writeln!(groups, "{},{},{}", s.frame, i, graph.groups[i]);
    }
    write(&dir.join("groups.csv"), groups)?;
    let mut edges = String::from("a,b,rho,gamma\n");
    for e in &graph.edges {
        let _ = writeln!(edges, "{},{},{},{}", e.a, e.b, e.rho, e.gamma);
    }
    write(&dir.join("edges.csv"), edges)
}
