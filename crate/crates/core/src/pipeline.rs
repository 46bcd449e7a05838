//! The fitting pipeline: scale recovery, filtering, per-frame segmentation,
//! flow association, per-group primitive fitting and contact completion.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::association::{merge_groups, SegmentGraph};
use crate::camera::CameraTrack;
use crate::config::PipelineConfig;
use crate::data::{Dataset, PointMapSequence};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::ingest::{apply_scale, filter_frame, recover_metric_scale, reject_humans, repair_frame};
use crate::primitive_fit::{complete_from_contacts, filter_contacts, fit_group, ContactEvent, FittedPrimitive, RansacParams};
use crate::segmentation::{cluster_normals, estimate_frame_normals, split_spatial, Segment};

/// Runs independent work items. Results come back in input order, so any
/// implementation yields identical output.
pub trait Executor: Sync {
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(usize, &T) -> R + Sync + Send;
}

/// Runs everything on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(usize, &T) -> R + Sync + Send,
    {
        items.iter().enumerate().map(|(i, x)| f(i, x)).collect()
    }
}

/// Pipeline stages, reported to the observer as each one starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Scale,
    Segment,
    Associate,
    Fit,
    Contacts,
    Done,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub id: usize,
    pub segments: usize,
    pub frames: usize,
    pub points: usize,
    /// Why the group produced no primitive, if it did not.
    pub skipped: Option<alloc::string::String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutput {
    /// Factor applied to the point maps to make them metric.
    pub scale: f64,
    /// Filtered, metric point maps.
    pub points: PointMapSequence,
    pub cameras: CameraTrack,
    pub graph: SegmentGraph,
    pub groups: Vec<GroupSummary>,
    pub events: Vec<ContactEvent>,
    /// Fitted primitives in group order, followed by contact-completed ones.
    pub primitives: Vec<FittedPrimitive>,
}

impl FitOutput {
    pub fn group_count(&self) -> usize {
        self.groups.len()
    }
}

/// Metric scale, then human rejection and per-frame filtering. Without human
/// depth maps the point maps are taken as metric.
pub fn prepare_points<E: Executor>(
    dataset: &Dataset,
    config: &PipelineConfig,
    exec: &E,
) -> Result<(f64, PointMapSequence, CameraTrack)> {
    let mut points = dataset.points.clone();
    let (scale, cams) = match &dataset.human {
        Some(human) => {
            let s = recover_metric_scale(&points, human, &dataset.cameras, config.scale_statistic)?;
            let cams = apply_scale(&mut points, &dataset.cameras, s);
            reject_humans(&mut points, human);
            (s, cams)
        }
        None => (1.0, dataset.cameras.clone()),
    };
    let frames = exec.map(&points.frames, |t, f| {
        let repaired = repair_frame(f, &cams.poses[t], &config.repair);
        filter_frame(&repaired, &cams.poses[t], dataset.motion.frames[t].pelvis(), &config.filter)
    });
    Ok((scale, PointMapSequence::new(frames)?, cams))
}

/// Normals, normal clustering and spatial splitting of every frame.
pub fn segment_frames<E: Executor>(
    points: &PointMapSequence,
    cams: &CameraTrack,
    config: &PipelineConfig,
    exec: &E,
) -> Vec<Vec<Segment>> {
    let spatial = config.spatial.for_resolution(points.width, points.height);
    exec.map(&points.frames, |t, frame| {
        let normals = estimate_frame_normals(frame, cams.center(t), &config.normals);
        match cluster_normals(&normals, &config.kmeans) {
            Ok(labels) => split_spatial(t, frame, &normals, &labels, &spatial),
            Err(err) => {
                log::debug!("frame {t}: {err}; no segments");
                Vec::new()
            }
        }
    })
}

/// Scores every flow whose stride is configured and merges segments into
/// groups.
pub fn associate<E: Executor>(
    segments: Vec<Vec<Segment>>,
    dataset: &Dataset,
    config: &PipelineConfig,
    exec: &E,
) -> SegmentGraph {
    let mut graph = SegmentGraph::new(segments);
    let strides = config.association.strides;
    let flows: Vec<_> = dataset
        .flows
        .iter()
        .filter(|f| f.target > f.source && strides.contains(&(f.target - f.source)))
        .collect();
    let edges = exec.map(&flows, |_, f| graph.score_flow(f, config.association.overlap));
    graph.edges = edges.into_iter().flatten().collect();
    merge_groups(&mut graph, config.association.rho_min, config.association.gamma_min);
    graph
}

/// Points of a group, with their `(frame, pixel)` origin, and the size-weighted
/// mean observed normal.
pub fn group_cloud(graph: &SegmentGraph, members: &[usize], points: &PointMapSequence) -> (Vec<Vec3>, Vec<(u32, u32)>, Vec3) {
    let mut cloud = Vec::new();
    let mut origin = Vec::new();
    let mut facing = Vec3::ZERO;
    for &n in members {
        let seg = &graph.nodes[n];
        let frame = &points.frames[seg.frame];
        for &m in &seg.members {
            cloud.push(frame.points[m as usize]);
            origin.push((seg.frame as u32, m));
        }
        facing += seg.mean_normal * seg.len() as f64;
    }
    (cloud, origin, facing.try_normalize().unwrap_or(Vec3::Z))
}

/// RANSAC parameters for group `g`: the seed depends only on the group id.
pub fn group_ransac(config: &PipelineConfig, g: usize) -> RansacParams {
    RansacParams {
        seed: config.ransac.seed.wrapping_add(g as u64),
        ..config.ransac
    }
}

/// Fits every group; groups that cannot be fitted are reported and skipped.
pub fn fit_groups<E: Executor>(
    graph: &SegmentGraph,
    points: &PointMapSequence,
    config: &PipelineConfig,
    exec: &E,
) -> (Vec<GroupSummary>, Vec<FittedPrimitive>) {
    let members = graph.members();
    let results = exec.map(&members, |g, m| {
        let (cloud, origin, facing) = group_cloud(graph, m, points);
        let mut frames: Vec<u32> = origin.iter().map(|o| o.0).collect();
        frames.dedup();
        let fit = fit_group(g, &cloud, facing, &group_ransac(config, g), &config.split);
        let summary = GroupSummary {
            id: g,
            segments: m.len(),
            frames: frames.len(),
            points: cloud.len(),
            skipped: fit.as_ref().err().map(|e| alloc::format!("{e}")),
        };
        (summary, fit.unwrap_or_default())
    });
    let mut summaries = Vec::with_capacity(results.len());
    let mut prims = Vec::new();
    for (s, p) in results {
        if let Some(why) = &s.skipped {
            log::warn!("group {} ({} points) skipped: {why}", s.id, s.points);
        }
        summaries.push(s);
        prims.extend(p);
    }
    (summaries, prims)
}

/// Full pipeline. `observer` is called at the start of each stage.
pub fn run_fit<E: Executor>(
    dataset: &Dataset,
    config: &PipelineConfig,
    exec: &E,
    observer: &mut dyn FnMut(Stage),
) -> Result<FitOutput> {
    config.validate()?;
    dataset.validate()?;
    observer(Stage::Scale);
    let (scale, points, cameras) = prepare_points(dataset, config, exec)?;
    observer(Stage::Segment);
    let segments = segment_frames(&points, &cameras, config, exec);
    observer(Stage::Associate);
    let graph = associate(segments, dataset, config, exec);
    observer(Stage::Fit);
    let (groups, mut primitives) = fit_groups(&graph, &points, config, exec);
    observer(Stage::Contacts);
    let mut events = Vec::new();
    if config.use_contacts {
        events = filter_contacts(&dataset.contacts, &config.contacts);
        primitives.extend(complete_from_contacts(&events, Some(&dataset.motion), &config.ransac));
    }
    observer(Stage::Done);
    if primitives.is_empty() {
        return Err(Error::DegenerateInput("no primitive could be fitted"));
    }
    Ok(FitOutput {
        scale,
        points,
        cameras,
        graph,
        groups,
        events,
        primitives,
    })
}
