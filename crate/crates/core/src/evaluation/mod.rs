//! Scene and motion metrics, and the motion-tracking reward.

mod chamfer;
mod kdtree;
mod motion;
mod reward;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use chamfer::{chamfer, one_way_chamfer, Chamfer, TriangleMesh};
pub use kdtree::KdTree;
pub use motion::{rigid_align, segments, trajectory_metrics, world_mpjpe, Alignment, TrajectoryMetrics, MIN_TRAILING, SEGMENT_LEN};
pub use reward::{
    early_termination_check, featurize, tracking_reward, EnergySign, Features, JointEffort, RewardWeights,
    GOAL_FEATURES_PER_JOINT, STATE_FEATURES_PER_JOINT, TERMINATION_DISTANCE,
};

use crate::data::MotionSequence;
use crate::error::Result;
use crate::geometry::{cuboid_signed_distance, PlanarPrimitive, Vec3};
use crate::math::round;

/// Fraction of body points that are not inside any primitive by more than
/// `eps`. Vacuously 1 when there are no points.
pub fn non_penetration(frames: &[Vec<Vec3>], prims: &[PlanarPrimitive], eps: f64) -> f64 {
    let mut total = 0usize;
    let mut free = 0usize;
    for f in frames {
        for &p in f {
            total += 1;
            if prims.iter().all(|b| cuboid_signed_distance(p, b) >= -eps) {
                free += 1;
            }
        }
    }
    if total == 0 { 1.0 } else { free as f64 / total as f64 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalParams {
    /// Points sampled on the ground-truth surface; the reconstruction is
    /// sampled at the same density.
    pub gt_samples: usize,
    pub seed: u64,
    /// Penetration tolerance (m).
    pub eps_pen: f64,
    pub weights: RewardWeights,
    pub energy_sign: EnergySign,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            gt_samples: 10_000,
            seed: 0,
            eps_pen: 0.01,
            weights: RewardWeights::default(),
            energy_sign: EnergySign::Penalty,
        }
    }
}

/// All metrics; a metric whose inputs were not supplied is `None`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub cd_bi: Option<f64>,
    pub cd_one_recon_to_gt: Option<f64>,
    pub cd_one_gt_to_recon: Option<f64>,
    pub non_pene: Option<f64>,
    pub wa_mpjpe100: Option<f64>,
    pub w_mpjpe100: Option<f64>,
    pub rte: Option<f64>,
    pub jitter: Option<f64>,
    pub accel: Option<f64>,
    pub reward: Option<Vec<f64>>,
}

/// Reconstruction samples at the ground truth's sampling density.
///
/// Each primitive is sampled on its own with a seed derived from its index,
/// so appending a primitive leaves the samples of the others unchanged.
pub fn sample_reconstruction(prims: &[PlanarPrimitive], gt: &TriangleMesh, params: &EvalParams) -> Result<Vec<Vec3>> {
    let density = params.gt_samples as f64 / gt.area();
    let mut out = Vec::new();
    for (k, p) in prims.iter().enumerate() {
        let mesh = TriangleMesh::from_primitives(core::slice::from_ref(p));
        let n = (round(mesh.area() * density) as usize).max(1);
        out.extend(mesh.sample(n, params.seed.wrapping_add(1 + k as u64))?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EvalInputs<'a> {
    pub primitives: Option<&'a [PlanarPrimitive]>,
    pub gt_scene: Option<&'a TriangleMesh>,
    pub pred_motion: Option<&'a MotionSequence>,
    pub gt_motion: Option<&'a MotionSequence>,
}

pub fn evaluate(inputs: &EvalInputs<'_>, params: &EvalParams) -> Result<EvaluationReport> {
    let mut r = EvaluationReport::default();
    if let (Some(prims), Some(gt)) = (inputs.primitives, inputs.gt_scene) {
        if !prims.is_empty() {
            let gt_pts = gt.sample(params.gt_samples, params.seed)?;
            let recon_pts = sample_reconstruction(prims, gt, params)?;
            let c = chamfer(&recon_pts, &gt_pts)?;
            r.cd_bi = Some(c.bi);
            r.cd_one_recon_to_gt = Some(c.recon_to_gt);
            r.cd_one_gt_to_recon = Some(c.gt_to_recon);
        }
    }
    if let (Some(prims), Some(pred)) = (inputs.primitives, inputs.pred_motion) {
        let body: Vec<Vec<Vec3>> = pred.frames.iter().map(|f| f.positions().collect()).collect();
        r.non_pene = Some(non_penetration(&body, prims, params.eps_pen));
    }
    if let (Some(pred), Some(gt)) = (inputs.pred_motion, inputs.gt_motion) {
        r.wa_mpjpe100 = Some(world_mpjpe(pred, gt, Alignment::FullSegment)?);
        r.w_mpjpe100 = Some(world_mpjpe(pred, gt, Alignment::FirstTwoFrames)?);
        let tm = trajectory_metrics(pred, gt)?;
        r.rte = Some(tm.rte);
        r.jitter = Some(tm.jitter);
        r.accel = Some(tm.accel);
        let trace = pred
            .frames
            .iter()
            .zip(&gt.frames)
            .map(|(s, g)| tracking_reward(s, g, &[], &params.weights, params.energy_sign))
            .collect::<Result<Vec<f64>>>()?;
        r.reward = Some(trace);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Mat3, Provenance};
    use alloc::vec;
    use proptest::prelude::*;

    fn slab(center: Vec3, extents: Vec3) -> PlanarPrimitive {
        PlanarPrimitive::new(Mat3::from_cols(Vec3::X, Vec3::Y, Vec3::Z), center, extents, Provenance::Fitted).unwrap()
    }

    #[test]
    fn above_ground_is_free() {
        let ground = slab(Vec3::new(0.0, 0.0, -0.025), Vec3::new(10.0, 10.0, 0.05));
        let frames = vec![vec![Vec3::new(0.0, 0.0, 0.5), Vec3::new(1.0, 1.0, 0.0)]];
        assert_eq!(non_penetration(&frames, &[ground], 0.01), 1.0);
        assert_eq!(non_penetration(&frames, &[], 0.01), 1.0);
    }

    #[test]
    fn half_inside() {
        let b = slab(Vec3::ZERO, Vec3::splat(1.0));
        // 0.1 m inside the top face vs 0.1 m above it
        let frames = vec![vec![Vec3::new(0.0, 0.0, 0.4); 3], vec![Vec3::new(0.0, 0.0, 0.6); 3]];
        assert_eq!(non_penetration(&frames, &[b], 0.01), 0.5);
    }

    #[test]
    fn own_samples_have_near_zero_chamfer() {
        let prims = [slab(Vec3::ZERO, Vec3::new(2.0, 1.0, 0.05)), slab(Vec3::Z, Vec3::new(0.5, 0.5, 0.05))];
        let gt = TriangleMesh::from_primitives(&prims);
        let inputs = EvalInputs {
            primitives: Some(&prims),
            gt_scene: Some(&gt),
            ..Default::default()
        };
        let r = evaluate(&inputs, &EvalParams::default()).unwrap();
        assert!(r.cd_bi.unwrap() < 0.02);
        assert!(r.non_pene.is_none() && r.w_mpjpe100.is_none() && r.reward.is_none());
    }

    #[test]
    fn appending_a_primitive_keeps_earlier_samples() {
        let a = slab(Vec3::ZERO, Vec3::new(2.0, 1.0, 0.05));
        let b = slab(Vec3::Z, Vec3::new(0.5, 0.5, 0.05));
        let gt = TriangleMesh::from_primitives(&[a]);
        let params = EvalParams::default();
        let one = sample_reconstruction(&[a], &gt, &params).unwrap();
        let two = sample_reconstruction(&[a, b], &gt, &params).unwrap();
        assert_eq!(one.len(), params.gt_samples);
        assert_eq!(&two[..one.len()], &one[..]);
        assert!(two.len() > one.len());
    }

    proptest! {
        #[test]
        fn growing_box_never_raises_score(grow in 0.0f64..0.5, px in -1.0f64..1.0, py in -1.0f64..1.0, pz in -1.0f64..1.0) {
            let frames = vec![vec![Vec3::new(px, py, pz), Vec3::new(pz, px, py), Vec3::new(0.3, -0.2, 0.1)]];
            let small = slab(Vec3::ZERO, Vec3::new(0.8, 0.6, 0.4));
            let big = slab(Vec3::ZERO, Vec3::new(0.8 + grow, 0.6 + grow, 0.4 + grow));
            prop_assert!(non_penetration(&frames, &[big], 0.01) <= non_penetration(&frames, &[small], 0.01));
        }
    }
}
