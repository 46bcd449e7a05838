use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SceneSpec;
use crate::data::FlowField;
use crate::geometry::{PlanarPrimitive, UnitQuat, Vec2, Vec3};
use crate::math::standard_normal;

/// Ground-truth id of pixels that see nothing.
pub const ID_NONE: i32 = -1;
/// Ground-truth id of pixels that see the person.
pub const ID_HUMAN: i32 = -2;

/// Depth range (m, along the optical axis) of outlier pixels.
pub const OUTLIER_DEPTH: (f64, f64) = (0.5, 8.0);

/// Occlusion tolerance for covisibility (m).
pub const COVISIBILITY_TOL: f64 = 1e-6;

/// Oriented box used as the rendered person.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyBox {
    pub rotation: UnitQuat,
    pub center: Vec3,
    pub half: Vec3,
}

/// One rendered frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRender {
    /// Observed points (noisy, in map units).
    pub points: Vec<Vec3>,
    pub valid: Vec<bool>,
    /// Noiseless world points of every hit pixel (metric).
    pub clean: Vec<Vec3>,
    /// Primitive index, [`ID_NONE`] or [`ID_HUMAN`] per pixel.
    pub ids: Vec<i32>,
    pub outlier: Vec<bool>,
    /// Metric depth of person pixels, zero elsewhere.
    pub human_depth: Vec<f64>,
}

struct Rect {
    id: i32,
    center: Vec3,
    n: Vec3,
    x: Vec3,
    y: Vec3,
    hx: f64,
    hy: f64,
}

/// Observed faces of the rendered primitives.
struct Scene {
    rects: Vec<Rect>,
}

impl Scene {
    fn new(spec: &SceneSpec) -> Self {
        let rects = spec
            .primitives
            .iter()
            .enumerate()
            .filter(|(i, _)| !spec.hidden.contains(i))
            .map(|(i, p)| face_of(i as i32, p))
            .collect();
        Self { rects }
    }

    /// Nearest hit along `o + t d` with `t > 0`.
    fn cast(&self, o: Vec3, d: Vec3, body: Option<&BodyBox>) -> Option<(f64, i32)> {
        let mut best: Option<(f64, i32)> = None;
        for r in &self.rects {
            let denom = d.dot(r.n);
            if denom.abs() < 1e-12 {
                continue;
            }
            let t = (r.center - o).dot(r.n) / denom;
            if !(t > 1e-9) || best.is_some_and(|b| t >= b.0) {
                continue;
            }
            let l = o + d * t - r.center;
            if l.dot(r.x).abs() <= r.hx && l.dot(r.y).abs() <= r.hy {
                best = Some((t, r.id));
            }
        }
        if let Some(b) = body {
            if let Some(t) = ray_box(o, d, b) {
                if best.is_none_or(|x| t < x.0) {
                    best = Some((t, ID_HUMAN));
                }
            }
        }
        best
    }
}

fn face_of(id: i32, p: &PlanarPrimitive) -> Rect {
    let h = p.half_extents();
    Rect {
        id,
        center: p.observed_face_center(),
        n: p.normal(),
        x: p.rotation.col(0),
        y: p.rotation.col(1),
        hx: h.x,
        hy: h.y,
    }
}

/// Slab test; entry distance if the ray starts outside and hits the box.
fn ray_box(o: Vec3, d: Vec3, b: &BodyBox) -> Option<f64> {
    let lo = b.rotation.inverse_rotate(o - b.center);
    let ld = b.rotation.inverse_rotate(d);
    let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..3 {
        if ld[k].abs() < 1e-15 {
            if lo[k].abs() > b.half[k] {
                return None;
            }
            continue;
        }
        let a = (-b.half[k] - lo[k]) / ld[k];
        let c = (b.half[k] - lo[k]) / ld[k];
        t0 = t0.max(a.min(c));
        t1 = t1.min(a.max(c));
    }
    (t0 <= t1 && t0 > 1e-9).then_some(t0)
}

fn pixel_rng(seed: u64, frame: usize, pixel: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame as u64);
    rng.set_word_pos(pixel as u128 * 8);
    rng
}

/// Ray-casts frame `t` of the scene. Rays are `K⁻¹ [u, v, 1]` rotated into
/// the world, so the hit parameter equals the depth along the optical axis.
pub fn render_frame(spec: &SceneSpec, t: usize, body: Option<&BodyBox>) -> FrameRender {
    let scene = Scene::new(spec);
    render_with(&scene, spec, t, body)
}

fn render_with(scene: &Scene, spec: &SceneSpec, t: usize, body: Option<&BodyBox>) -> FrameRender {
    let (w, h) = (spec.width, spec.height);
    let k = spec.cameras.intrinsics;
    let pose = spec.cameras.poses[t];
    let o = pose.translation;
    let n = w * h;
    let mut out = FrameRender {
        points: vec![Vec3::ZERO; n],
        valid: vec![false; n],
        clean: vec![Vec3::ZERO; n],
        ids: vec![ID_NONE; n],
        outlier: vec![false; n],
        human_depth: vec![0.0; n],
    };
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            let d = pose.rotation.rotate(k.ray(c as f64, r as f64));
            let Some((depth, id)) = scene.cast(o, d, body) else {
                continue;
            };
            let clean = o + d * depth;
            out.clean[i] = clean;
            out.ids[i] = id;
            out.valid[i] = true;
            if id == ID_HUMAN {
                out.human_depth[i] = depth;
            }
            let mut observed = clean;
            if spec.sigma > 0.0 || spec.outlier_fraction > 0.0 {
                let mut rng = pixel_rng(spec.seed, t, i);
                let u_out: f64 = rng.random();
                let noise = standard_normal(&mut rng);
                let u_depth: f64 = rng.random();
                if u_out < spec.outlier_fraction {
                    let z = OUTLIER_DEPTH.0 + (OUTLIER_DEPTH.1 - OUTLIER_DEPTH.0) * u_depth;
                    observed = o + d * z;
                    out.outlier[i] = true;
                } else {
                    observed = o + d * (depth + spec.sigma * noise / d.norm());
                }
            }
            out.points[i] = observed * spec.map_scale;
        }
    }
    out
}

/// Renders every frame; `bodies[t]` is the person in frame `t`, if any.
pub fn render_pointmaps(spec: &SceneSpec, bodies: &[Option<BodyBox>]) -> Vec<FrameRender> {
    let scene = Scene::new(spec);
    (0..spec.cameras.poses.len())
        .map(|t| render_with(&scene, spec, t, bodies.get(t).copied().flatten().as_ref()))
        .collect()
}

/// Flow from frame `i` to frame `j` by projecting the noiseless points of
/// frame `i`. A pixel is covisible when it sees static geometry, projects
/// inside frame `j`, and nothing in frame `j` is in front of it.
pub fn exact_flow(
    spec: &SceneSpec,
    source: &FrameRender,
    i: usize,
    j: usize,
    body_j: Option<&BodyBox>,
) -> FlowField {
    let scene = Scene::new(spec);
    exact_flow_with(&scene, spec, source, i, j, body_j)
}

fn exact_flow_with(
    scene: &Scene,
    spec: &SceneSpec,
    source: &FrameRender,
    i: usize,
    j: usize,
    body_j: Option<&BodyBox>,
) -> FlowField {
    let (w, h) = (spec.width, spec.height);
    let k = spec.cameras.intrinsics;
    let to_j = spec.cameras.poses[j].inverse();
    let oj = spec.cameras.poses[j].translation;
    let n = w * h;
    let mut flow = vec![Vec2::new(0.0, 0.0); n];
    let mut covisible = vec![false; n];
    for r in 0..h {
        for c in 0..w {
            let p = r * w + c;
            if source.ids[p] < 0 {
                continue;
            }
            let x = source.clean[p];
            let local = to_j.transform_point(x);
            let Some(uv) = k.project(local) else {
                continue;
            };
            flow[p] = Vec2::new(uv.x - c as f64, uv.y - r as f64);
            if !(uv.x > -0.5 && uv.y > -0.5 && uv.x < w as f64 - 0.5 && uv.y < h as f64 - 0.5) {
                continue;
            }
            // the ray through x has unit optical-axis component, so t = depth
            let d = (x - oj) / local.z;
            if let Some((t, _)) = scene.cast(oj, d, body_j) {
                covisible[p] = t >= local.z - COVISIBILITY_TOL;
            }
        }
    }
    FlowField {
        source: i,
        target: j,
        width: w,
        height: h,
        flow,
        covisible,
    }
}

/// Exact flows for every `(i, j)` pair.
pub fn exact_flows(
    spec: &SceneSpec,
    renders: &[FrameRender],
    bodies: &[Option<BodyBox>],
    pairs: &[(usize, usize)],
) -> Vec<FlowField> {
    let scene = Scene::new(spec);
    pairs
        .iter()
        .map(|&(i, j)| exact_flow_with(&scene, spec, &renders[i], i, j, bodies.get(j).copied().flatten().as_ref()))
        .collect()
}
