//! DBSCAN over 3D points with a uniform grid index.
//!
//! Conventions:
//! - the eps-neighborhood of `p` is `{q : |p − q| ≤ eps}` and includes `p`;
//! - `p` is a core point when its neighborhood has at least `min_pts` points;
//! - clusters are the connected components of core points under the eps
//!   relation, numbered by their smallest point index;
//! - a non-core point within eps of some core point joins the cluster of its
//!   lowest-index core neighbor; everything else is noise (`None`).

use alloc::vec;
use alloc::vec::Vec;

use foldhash::fast::FixedState;
use hashbrown::HashMap;

use crate::association::UnionFind;
use crate::geometry::Vec3;
use crate::math::{floor, sqrt};

type Cell = (i64, i64, i64);

struct Grid {
    /// Point indices sorted by cell, each cell a contiguous run.
    order: Vec<usize>,
    cells: Vec<(Cell, usize, usize)>,
    lookup: HashMap<Cell, usize, FixedState>,
}

impl Grid {
    fn new(points: &[Vec3], side: f64) -> Self {
        let key = |p: Vec3| -> Cell {
            (
                floor(p.x / side) as i64,
                floor(p.y / side) as i64,
                floor(p.z / side) as i64,
            )
        };
        let keys: Vec<Cell> = points.iter().map(|&p| key(p)).collect();
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| keys[a].cmp(&keys[b]).then(a.cmp(&b)));
        let mut cells = Vec::new();
        let mut lookup = HashMap::with_hasher(FixedState::default());
        let mut start = 0;
        while start < order.len() {
            let k = keys[order[start]];
            let mut end = start + 1;
            while end < order.len() && keys[order[end]] == k {
                end += 1;
            }
            lookup.insert(k, cells.len());
            cells.push((k, start, end));
            start = end;
        }
        Self {
            order,
            cells,
            lookup,
        }
    }

    fn members(&self, cell: usize) -> &[usize] {
        let (_, s, e) = self.cells[cell];
        &self.order[s..e]
    }

    /// Non-empty cells within `reach` cells of `cell` (including itself).
    fn neighbors(&self, cell: usize, reach: i64, out: &mut Vec<usize>) {
        out.clear();
        let (k, _, _) = self.cells[cell];
        for dx in -reach..=reach {
            for dy in -reach..=reach {
                for dz in -reach..=reach {
                    if let Some(&c) = self.lookup.get(&(k.0 + dx, k.1 + dy, k.2 + dz)) {
                        out.push(c);
                    }
                }
            }
        }
    }
}

/// Cluster label per point (`None` = noise).
pub fn dbscan(points: &[Vec3], eps: f64, min_pts: usize) -> Vec<Option<usize>> {
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    let eps2 = eps * eps;
    // cells of side eps/√3: any two points sharing a cell are neighbors
    let grid = Grid::new(points, eps / sqrt(3.0) * (1.0 - 1e-9));
    let reach = 2;
    let ncells = grid.cells.len();
    let mut nbr_cells: Vec<Vec<usize>> = Vec::with_capacity(ncells);
    let mut scratch = Vec::new();
    for c in 0..ncells {
        grid.neighbors(c, reach, &mut scratch);
        nbr_cells.push(scratch.clone());
    }

    // core flags
    let mut core = vec![false; n];
    for c in 0..ncells {
        let own = grid.members(c);
        if own.len() >= min_pts {
            for &p in own {
                core[p] = true;
            }
            continue;
        }
        for &p in own {
            let mut count = 0usize;
            'scan: for &nc in &nbr_cells[c] {
                for &q in grid.members(nc) {
                    if points[p].distance_squared(points[q]) <= eps2 {
                        count += 1;
                        if count >= min_pts {
                            break 'scan;
                        }
                    }
                }
            }
            core[p] = count >= min_pts;
        }
    }

    // connect core points: all core points of a cell are mutually connected,
    // so union-find runs over cells
    let mut uf = UnionFind::new(ncells);
    let cell_core: Vec<Vec<usize>> = (0..ncells)
        .map(|c| grid.members(c).iter().copied().filter(|&p| core[p]).collect())
        .collect();
    for c in 0..ncells {
        if cell_core[c].is_empty() {
            continue;
        }
        for &nc in &nbr_cells[c] {
            if nc <= c || cell_core[nc].is_empty() || uf.find(c) == uf.find(nc) {
                continue;
            }
            let linked = cell_core[c]
                .iter()
                .any(|&p| cell_core[nc].iter().any(|&q| points[p].distance_squared(points[q]) <= eps2));
            if linked {
                uf.union(c, nc);
            }
        }
    }

    // cluster ids ordered by smallest core point index
    let mut cell_of = vec![0usize; n];
    for c in 0..ncells {
        for &p in grid.members(c) {
            cell_of[p] = c;
        }
    }
    let mut root_id: Vec<Option<usize>> = vec![None; ncells];
    let mut next = 0;
    let mut labels = vec![None; n];
    for p in 0..n {
        if core[p] {
            let r = uf.find(cell_of[p]);
            let id = *root_id[r].get_or_insert_with(|| {
                next += 1;
                next - 1
            });
            labels[p] = Some(id);
        }
    }

    // border points
    for p in 0..n {
        if core[p] {
            continue;
        }
        let mut best: Option<usize> = None;
        for &nc in &nbr_cells[cell_of[p]] {
            for &q in &cell_core[nc] {
                if best.is_none_or(|b| q < b) && points[p].distance_squared(points[q]) <= eps2 {
                    best = Some(q);
                }
            }
        }
        labels[p] = best.and_then(|q| labels[q]);
    }
    labels
}
