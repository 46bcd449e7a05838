use alloc::vec::Vec;

use crate::geometry::Vec3;

const LEAF: usize = 8;

/// Static 3D k-d tree for exact nearest-neighbor distance queries.
#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Vec3>,
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

impl KdTree {
    pub fn new(points: &[Vec3]) -> Self {
        let mut pts = points.to_vec();
        let mut nodes = Vec::new();
        if !pts.is_empty() {
            let n = pts.len();
            build(&mut pts, 0, n, &mut nodes);
        }
        Self { points: pts, nodes }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Squared distance from `q` to the closest stored point.
    pub fn nearest_distance_squared(&self, q: Vec3) -> Option<f64> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = f64::INFINITY;
        self.search(0, q, &mut best);
        Some(best)
    }

    fn search(&self, node: usize, q: Vec3, best: &mut f64) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for p in &self.points[start..end] {
                    let d = p.distance_squared(q);
                    if d < *best {
                        *best = d;
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, best);
                if diff * diff <= *best {
                    self.search(far, q, best);
                }
            }
        }
    }
}

fn build(pts: &mut [Vec3], start: usize, end: usize, nodes: &mut Vec<Node>) -> usize {
    let id = nodes.len();
    nodes.push(Node::Leaf { start, end });
    if end - start <= LEAF {
        return id;
    }
    let slice = &mut pts[start..end];
    let (mut lo, mut hi) = (slice[0], slice[0]);
    for p in slice.iter() {
        lo = lo.min(*p);
        hi = hi.max(*p);
    }
    let span = hi - lo;
    let axis = if span.x >= span.y && span.x >= span.z {
        0
    } else if span.y >= span.z {
        1
    } else {
        2
    };
    if span[axis] == 0.0 {
        return id;
    }
    let mid = slice.len() / 2;
    slice.select_nth_unstable_by(mid, |a, b| a[axis].total_cmp(&b[axis]));
    let value = slice[mid][axis];
    // left ≤ value ≤ right along `axis`
    let left = build(pts, start, start + mid, nodes);
    let right = build(pts, start + mid, end, nodes);
    nodes[id] = Node::Split {
        axis,
        value,
        left,
        right,
    };
    id
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1usize, 2, 9, 100, 1000] {
            let pts: Vec<Vec3> = (0..n).map(|_| Vec3::new(rng.random(), rng.random(), rng.random())).collect();
            let tree = KdTree::new(&pts);
            for _ in 0..200 {
                let q = Vec3::new(rng.random_range(-0.5..1.5), rng.random(), rng.random());
                let brute = pts.iter().map(|p| p.distance_squared(q)).fold(f64::INFINITY, f64::min);
                assert_eq!(tree.nearest_distance_squared(q), Some(brute));
            }
        }
    }

    #[test]
    fn duplicates_and_ties() {
        let pts = alloc::vec![Vec3::ZERO; 50];
        let tree = KdTree::new(&pts);
        assert_eq!(tree.nearest_distance_squared(Vec3::X), Some(1.0));
        assert_eq!(KdTree::new(&[]).nearest_distance_squared(Vec3::X), None);
    }
}
