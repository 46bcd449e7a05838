//! Temporal association of per-frame segments into global planar groups.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::FlowField;
use crate::geometry::Vec3;
use crate::math::round;
use crate::segmentation::Segment;

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `true` if `a` and `b` were in different sets.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            core::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    /// Compact component labels, numbered by smallest member.
    pub fn labels(&mut self) -> Vec<usize> {
        let n = self.parent.len();
        let mut id = vec![usize::MAX; n];
        let mut next = 0;
        let mut out = Vec::with_capacity(n);
        for x in 0..n {
            let r = self.find(x);
            if id[r] == usize::MAX {
                id[r] = next;
                next += 1;
            }
            out.push(id[r]);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapMode {
    /// `|A ∩ B| / min(|A|, |B|)`
    #[default]
    Min,
    /// `|A ∩ B| / |A ∪ B|`
    Iou,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AssociationParams {
    pub rho_min: f64,
    pub gamma_min: f64,
    pub overlap: OverlapMode,
    /// Frame strides for which flow pairs `(i, i + s)` are used.
    pub strides: [usize; 2],
}

impl Default for AssociationParams {
    fn default() -> Self {
        Self {
            rho_min: 0.5,
            gamma_min: crate::math::cos(crate::math::rad(15.0)),
            overlap: OverlapMode::Min,
            strides: [1, 5],
        }
    }
}

/// Frame pairs `(i, i + s)` for every stride `s`, ordered by source frame.
pub fn pair_schedule(frames: usize, strides: &[usize]) -> Vec<(usize, usize)> {
    let mut strides: Vec<usize> = strides.iter().copied().filter(|&s| s > 0).collect();
    strides.sort_unstable();
    strides.dedup();
    let mut out = Vec::new();
    for i in 0..frames {
        for &s in &strides {
            if i + s < frames {
                out.push((i, i + s));
            }
        }
    }
    out
}

/// Moves every member pixel by its flow vector to the nearest target pixel.
///
/// Pixels whose destination is out of bounds or not covisible are dropped.
/// The result is sorted and deduplicated.
pub fn warp_segment(seg: &Segment, flow: &FlowField) -> Vec<u32> {
    let (w, h) = (flow.width as f64, flow.height as f64);
    let mut out = Vec::with_capacity(seg.members.len());
    for &m in &seg.members {
        let i = m as usize;
        if !flow.covisible[i] {
            continue;
        }
        let (r, c) = (i / flow.width, i % flow.width);
        let d = flow.flow[i];
        let u = round(c as f64 + d.x);
        let v = round(r as f64 + d.y);
        if !(u >= 0.0 && v >= 0.0 && u < w && v < h) {
            continue;
        }
        out.push((v as usize * flow.width + u as usize) as u32);
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Size of the intersection of two sorted pixel sets.
pub fn intersection_size(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Overlap ratio of a warped pixel set with a target segment, and the cosine
/// between the two segments' mean normals.
pub fn score_pair(warped: &[u32], source_normal: Vec3, target: &Segment, mode: OverlapMode) -> (f64, f64) {
    let inter = intersection_size(warped, &target.members);
    let rho = match mode {
        OverlapMode::Min => {
            let d = warped.len().min(target.members.len());
            if d == 0 { 0.0 } else { inter as f64 / d as f64 }
        }
        OverlapMode::Iou => {
            let d = warped.len() + target.members.len() - inter;
            if d == 0 { 0.0 } else { inter as f64 / d as f64 }
        }
    };
    let gamma = source_normal.dot(target.mean_normal).clamp(-1.0, 1.0);
    (rho, gamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub rho: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentGraph {
    /// All segments, ordered by frame.
    pub nodes: Vec<Segment>,
    pub edges: Vec<Edge>,
    /// Group id per node; singletons until [`merge_groups`] runs.
    pub groups: Vec<usize>,
}

impl SegmentGraph {
    /// Flattens per-frame segments into nodes and indexes the first node of
    /// each frame.
    pub fn new(segments: Vec<Vec<Segment>>) -> Self {
        let nodes: Vec<Segment> = segments.into_iter().flatten().collect();
        let groups = (0..nodes.len()).collect();
        Self {
            nodes,
            edges: Vec::new(),
            groups,
        }
    }

    pub fn group_count(&self) -> usize {
        self.groups.iter().max().map_or(0, |m| m + 1)
    }

    /// Node indices per group.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.group_count()];
        for (n, &g) in self.groups.iter().enumerate() {
            out[g].push(n);
        }
        out
    }

    fn frame_ranges(&self) -> Vec<(usize, usize, usize)> {
        let mut out: Vec<(usize, usize, usize)> = Vec::new();
        for (i, s) in self.nodes.iter().enumerate() {
            match out.last_mut() {
                Some(last) if last.0 == s.frame => last.2 = i + 1,
                _ => out.push((s.frame, i, i + 1)),
            }
        }
        out
    }

    /// Edges for one flow field: every source segment of `flow.source`
    /// against every target segment of `flow.target` with nonzero overlap.
    pub fn score_flow(&self, flow: &FlowField, mode: OverlapMode) -> Vec<Edge> {
        let ranges = self.frame_ranges();
        let find = |f: usize| ranges.iter().find(|r| r.0 == f).map(|r| (r.1, r.2));
        let (Some((s0, s1)), Some((t0, t1))) = (find(flow.source), find(flow.target)) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for a in s0..s1 {
            let warped = warp_segment(&self.nodes[a], flow);
            if warped.is_empty() {
                continue;
            }
            for b in t0..t1 {
                let (rho, gamma) = score_pair(&warped, self.nodes[a].mean_normal, &self.nodes[b], mode);
                if rho > 0.0 {
                    out.push(Edge { a, b, rho, gamma });
                }
            }
        }
        out
    }
}

/// Unions the endpoints of every edge with `rho ≥ rho_min` and
/// `gamma ≥ gamma_min`; groups are the connected components.
pub fn merge_groups(graph: &mut SegmentGraph, rho_min: f64, gamma_min: f64) {
    let mut uf = UnionFind::new(graph.nodes.len());
    for e in &graph.edges {
        if e.rho >= rho_min && e.gamma >= gamma_min {
            uf.union(e.a, e.b);
        }
    }
    graph.groups = uf.labels();
}
