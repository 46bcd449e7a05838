//! Every tunable of the fitting pipeline, with range checks.

use serde::{Deserialize, Serialize};

use crate::association::AssociationParams;
use crate::error::{Error, Result};
use crate::evaluation::EvalParams;
use crate::ingest::{FilterParams, RepairParams, ScaleStatistic};
use crate::primitive_fit::{ContactParams, RansacParams, SplitParams};
use crate::segmentation::{KMeansParams, NormalParams, SpatialParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub scale_statistic: ScaleStatistic,
    pub repair: RepairParams,
    pub filter: FilterParams,
    pub normals: NormalParams,
    pub kmeans: KMeansParams,
    /// Thresholds at the 256×256 reference resolution; pixel counts are
    /// rescaled to the input resolution.
    pub spatial: SpatialParams,
    pub association: AssociationParams,
    pub ransac: RansacParams,
    pub split: SplitParams,
    pub contacts: ContactParams,
    /// Add primitives completed from stable contacts.
    pub use_contacts: bool,
    pub eval: EvalParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            scale_statistic: ScaleStatistic::Median,
            repair: RepairParams::default(),
            filter: FilterParams::default(),
            normals: NormalParams::default(),
            kmeans: KMeansParams::default(),
            spatial: SpatialParams::default(),
            association: AssociationParams::default(),
            ransac: RansacParams::default(),
            split: SplitParams::default(),
            contacts: ContactParams::default(),
            use_contacts: true,
            eval: EvalParams::default(),
        }
    }
}

fn check(ok: bool, msg: &'static str) -> Result<()> {
    if ok { Ok(()) } else { Err(Error::InvalidConfig(msg)) }
}

impl PipelineConfig {
    /// Sets every random seed to `seed`.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.kmeans.seed = seed;
        self.ransac.seed = seed;
        self.eval.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let f = &self.filter;
        check(f.depth_percentile > 0.0 && f.depth_percentile <= 1.0, "filter.depth_percentile must lie in (0, 1]")?;
        check(f.pelvis_radius > 0.0, "filter.pelvis_radius must be positive")?;
        check(self.repair.rel_tol > 0.0, "repair.rel_tol must be positive")?;
        let n = &self.normals;
        check(n.step >= 1, "normals.step must be at least 1")?;
        check(
            n.max_tangent_angle_deg > 0.0 && n.max_tangent_angle_deg <= 180.0,
            "normals.max_tangent_angle_deg must lie in (0, 180]",
        )?;
        check(n.max_tangent_ratio >= 1.0, "normals.max_tangent_ratio must be at least 1")?;
        let k = &self.kmeans;
        check((1..=64).contains(&k.k), "kmeans.k must lie in [1, 64]")?;
        check(k.max_iter >= 1, "kmeans.max_iter must be at least 1")?;
        check(k.tol >= 0.0, "kmeans.tol must be non-negative")?;
        check((0.0..90.0).contains(&k.merge_angle_deg), "kmeans.merge_angle_deg must lie in [0, 90)")?;
        check(k.max_angle_deg > 0.0 && k.max_angle_deg <= 180.0, "kmeans.max_angle_deg must lie in (0, 180]")?;
        let s = &self.spatial;
        check(s.eps > 0.0 && s.eps.is_finite(), "spatial.eps must be positive")?;
        check(s.min_pts >= 1, "spatial.min_pts must be at least 1")?;
        let a = &self.association;
        check(a.rho_min > 0.0 && a.rho_min <= 1.0, "association.rho_min must lie in (0, 1]")?;
        check((-1.0..=1.0).contains(&a.gamma_min), "association.gamma_min must lie in [-1, 1]")?;
        check(a.strides.iter().all(|&s| s >= 1), "association.strides must be positive")?;
        let r = &self.ransac;
        check(r.inlier_tol > 0.0 && r.inlier_tol.is_finite(), "ransac.inlier_tol must be positive")?;
        check(r.iters >= 1, "ransac.iters must be at least 1")?;
        check(r.min_points >= 3, "ransac.min_points must be at least 3")?;
        check(r.max_score_points >= 3, "ransac.max_score_points must be at least 3")?;
        let sp = &self.split;
        check((0.0..=1.0).contains(&sp.fill_min), "split.fill_min must lie in [0, 1]")?;
        check(sp.cell > 0.0 && sp.cell.is_finite(), "split.cell must be positive")?;
        check(sp.max_depth <= 16, "split.max_depth must be at most 16")?;
        let c = &self.contacts;
        check(c.window >= 1, "contacts.window must be at least 1")?;
        check((0.0..=1.0).contains(&c.tau), "contacts.tau must lie in [0, 1]")?;
        check(c.nu >= 0.0 && c.nu.is_finite(), "contacts.nu must be non-negative")?;
        let e = &self.eval;
        check(e.gt_samples >= 1, "eval.gt_samples must be at least 1")?;
        check(e.eps_pen >= 0.0 && e.eps_pen.is_finite(), "eval.eps_pen must be non-negative")?;
        e.weights.validate()
    }
}
