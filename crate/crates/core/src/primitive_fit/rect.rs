use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::math::{atan2, cos, floor, sin, PI};

/// An oriented rectangle in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect2 {
    /// Direction of the x axis in `[0, π)`.
    pub angle: f64,
    pub center: Vec2,
    /// `half.x >= half.y`.
    pub half: Vec2,
}

impl Rect2 {
    pub fn area(&self) -> f64 {
        4.0 * self.half.x * self.half.y
    }

    pub fn axes(&self) -> (Vec2, Vec2) {
        let x = Vec2::new(cos(self.angle), sin(self.angle));
        (x, Vec2::new(-x.y, x.x))
    }
}

/// Convex hull in counter-clockwise order without collinear points
/// (monotone chain).
pub fn convex_hull(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Vec2, a: Vec2, b: Vec2| (a - o).cross(b - o);
    let mut hull: Vec<Vec2> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Minimum-area enclosing rectangle by rotating calipers over hull edges.
pub fn min_area_rect(points: &[Vec2]) -> Result<Rect2> {
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return Err(Error::DegenerateInput("footprint points are collinear"));
    }
    let n = hull.len();
    let mut best: Option<(f64, f64, Vec2, Vec2)> = None;
    for i in 0..n {
        let e = hull[(i + 1) % n] - hull[i];
        let len = e.norm();
        if len == 0.0 {
            continue;
        }
        let u = e * (1.0 / len);
        let v = Vec2::new(-u.y, u.x);
        let (mut u0, mut u1, mut v0, mut v1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &p in &hull {
            let (a, b) = (p.dot(u), p.dot(v));
            u0 = u0.min(a);
            u1 = u1.max(a);
            v0 = v0.min(b);
            v1 = v1.max(b);
        }
        let area = (u1 - u0) * (v1 - v0);
        if best.is_none_or(|b| area < b.0 * (1.0 - 1e-12)) {
            let center = u * (0.5 * (u0 + u1)) + v * (0.5 * (v0 + v1));
            best = Some((area, atan2(u.y, u.x), center, Vec2::new(0.5 * (u1 - u0), 0.5 * (v1 - v0))));
        }
    }
    let (_, mut angle, center, mut half) = best.ok_or(Error::DegenerateInput("footprint points are collinear"))?;
    if half.y > half.x {
        half = Vec2::new(half.y, half.x);
        angle += 0.5 * PI;
    }
    angle = wrap_pi(angle);
    if (half.x - half.y).abs() <= 1e-9 * half.x {
        // square: the two axis choices are equivalent, keep the smaller angle
        let other = wrap_pi(angle + 0.5 * PI);
        angle = angle.min(other);
    }
    if PI - angle < 1e-12 {
        angle = 0.0;
    }
    Ok(Rect2 { angle, center, half })
}

fn wrap_pi(a: f64) -> f64 {
    a - PI * floor(a / PI)
}
