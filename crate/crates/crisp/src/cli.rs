//! The `crisp` command line: `fit`, `eval`, `synth` and `export`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use crisp_core::config::PipelineConfig;
use crisp_core::evaluation::{evaluate, EvalInputs};
use crisp_core::geometry::Provenance;
use crisp_core::pipeline::{run_fit, GroupSummary, Stage};
use crisp_core::synth::{generate, Scenario, SynthOptions};
use serde::Serialize;
use serde_json::json;

use crate::dataset::{load_dataset, read_motion_file, save_dataset};
use crate::error::{Error, Result};
use crate::exec::{worker_count, PoolExecutor};
use crate::groundtruth::write_ground_truth;
use crate::mesh::read_mesh;
use crate::primitives::{config_hash, export, read_primitive_file, to_obj, ExportFormat, PrimitiveFile};
use crate::report::{write_report, write_reward_csv, ReportFile};
use crate::{debug, logging};

pub const PRIMITIVES_JSON: &str = "primitives.json";
pub const PRIMITIVES_OBJ: &str = "primitives.obj";
pub const RUN_JSON: &str = "run.json";

#[derive(Debug, Parser)]
#[command(name = "crisp", version, about = "Planar primitive fitting from temporal point maps")]
pub struct Cli {
    /// Only log warnings and errors.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit primitives to a dataset directory.
    Fit(FitArgs),
    /// Compute scene and motion metrics.
    Eval(EvalArgs),
    /// Write a synthetic dataset with a ground-truth sidecar.
    Synth(SynthArgs),
    /// Convert a primitive file to OBJ or a simulator manifest.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Dataset directory or manifest path.
    pub dataset: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Skip contact-guided completion.
    #[arg(long)]
    pub no_contact: bool,
    /// JSON pipeline config; unspecified fields keep their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for every random stage.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: $CRISP_WORKERS, else all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Write segment label images, segment tables, groups and edges here.
    #[arg(long)]
    pub debug_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub primitives: Option<PathBuf>,
    /// Ground-truth scene mesh (.ply or .obj).
    #[arg(long)]
    pub gt_scene: Option<PathBuf>,
    #[arg(long)]
    pub pred_motion: Option<PathBuf>,
    #[arg(long)]
    pub gt_motion: Option<PathBuf>,
    /// Eval config; must match the primitives' config unless --force.
    /// Defaults to the config stored in the primitive file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
    /// Frame rate for motion files without an fps header.
    #[arg(long, default_value_t = 30.0)]
    pub fps: f64,
    /// Directory for report.json and reward.csv; the report goes to stdout
    /// when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_parser = ["walk", "sit", "stairs", "room"])]
    pub scenario: String,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Depth noise along camera rays (m).
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// Fraction of pixels replaced by uniform-depth outliers.
    #[arg(long, default_value_t = 0.0)]
    pub outliers: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub frames: usize,
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[arg(long, default_value_t = 256)]
    pub height: usize,
    /// Scale applied to points and camera translations, to be undone by
    /// scale recovery.
    #[arg(long, default_value_t = 1.0)]
    pub map_scale: f64,
    /// Render the seat in the sit scenario.
    #[arg(long)]
    pub show_seat: bool,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// `obj` or `sim-manifest`.
    #[arg(long)]
    pub format: String,
    pub primitives: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
}

/// Defaults, then the config file, then flags.
pub fn resolve_config(file: Option<&Path>, seed: Option<u64>, no_contact: bool) -> Result<PipelineConfig> {
    let mut config = match file {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| Error::parse(p, e))?
        }
        None => PipelineConfig::default(),
    };
    if let Some(s) = seed {
        config = config.with_seed(s);
    }
    if no_contact {
        config.use_contacts = false;
    }
    config.validate()?;
    Ok(config)
}

#[derive(Serialize)]
struct StageTiming {
    stage: Stage,
    ms: f64,
}

#[derive(Serialize)]
struct RunMetadata<'a> {
    dataset: String,
    config_hash: String,
    config: &'a PipelineConfig,
    workers: usize,
    scale: f64,
    segments: usize,
    groups: &'a [GroupSummary],
    contact_events: usize,
    primitives: usize,
    contact_completed: usize,
    stages: Vec<StageTiming>,
    total_ms: f64,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn cmd_fit(args: &FitArgs) -> Result<()> {
    let config = resolve_config(args.config.as_deref(), args.seed, args.no_contact)?;
    let dataset = load_dataset(&args.dataset)?;
    let exec = PoolExecutor::new(worker_count(args.workers));
    logging::event(
        "fit_start",
        json!({ "dataset": args.dataset.display().to_string(), "frames": dataset.points.len(), "workers": exec.workers() }),
    );

    let start = Instant::now();
    let mut stages: Vec<StageTiming> = Vec::new();
    let mut current: Option<(Stage, Instant)> = None;
    let mut observer = |s: Stage| {
        let now = Instant::now();
        if let Some((prev, t0)) = current.take() {
            let ms = now.duration_since(t0).as_secs_f64() * 1e3;
            logging::event("stage", json!({ "stage": prev, "ms": ms }));
            stages.push(StageTiming { stage: prev, ms });
        }
        if s != Stage::Done {
            current = Some((s, now));
        }
    };
    let out = run_fit(&dataset, &config, &exec, &mut observer)?;
    let total_ms = start.elapsed().as_secs_f64() * 1e3;

    let file = PrimitiveFile::new(&config, out.scale, &out.primitives);
    fs::create_dir_all(&args.output).map_err(|e| Error::io(&args.output, e))?;
    write_text(&args.output.join(PRIMITIVES_JSON), &file.to_json())?;
    let prims: Vec<_> = out.primitives.iter().map(|f| f.primitive).collect();
    write_text(&args.output.join(PRIMITIVES_OBJ), &to_obj(&prims))?;
    let meta = RunMetadata {
        dataset: args.dataset.display().to_string(),
        config_hash: file.config_hash.clone(),
        config: &config,
        workers: exec.workers(),
        scale: out.scale,
        segments: out.graph.nodes.len(),
        groups: &out.groups,
        contact_events: out.events.len(),
        primitives: prims.len(),
        contact_completed: prims.iter().filter(|p| p.provenance == Provenance::ContactCompleted).count(),
        stages,
        total_ms,
    };
    write_text(
        &args.output.join(RUN_JSON),
        &(serde_json::to_string_pretty(&meta).expect("run metadata serializes") + "\n"),
    )?;
    if let Some(dir) = &args.debug_dir {
        debug::dump(dir, &out.graph, out.points.width, out.points.height, out.points.len())?;
    }
    logging::event(
        "fit_done",
        json!({ "primitives": prims.len(), "groups": out.group_count(), "total_ms": total_ms }),
    );
    Ok(())
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let prim_file = args.primitives.as_deref().map(read_primitive_file).transpose()?;
    let config = match (&args.config, &prim_file) {
        (Some(p), _) => {
            let c = resolve_config(Some(p), None, false)?;
            if let Some(f) = &prim_file {
                let h = config_hash(&c);
                if h != f.config_hash && !args.force {
                    return Err(Error::ConfigMismatch {
                        fitted: f.config_hash.clone(),
                        eval: h,
                    });
                }
            }
            c
        }
        (None, Some(f)) => f.config.clone(),
        (None, None) => PipelineConfig::default(),
    };
    let prims = prim_file.as_ref().map(|f| f.primitives()).transpose()?;
    let gt_scene = args.gt_scene.as_deref().map(read_mesh).transpose()?;
    let pred = args.pred_motion.as_deref().map(|p| read_motion_file(p, args.fps)).transpose()?;
    let gt = args.gt_motion.as_deref().map(|p| read_motion_file(p, args.fps)).transpose()?;
    let inputs = EvalInputs {
        primitives: prims.as_deref(),
        gt_scene: gt_scene.as_ref(),
        pred_motion: pred.as_ref(),
        gt_motion: gt.as_ref(),
    };
    let report = evaluate(&inputs, &config.eval)?;
    let file = ReportFile::new(&report, config_hash(&config), prim_file.as_ref().map(|f| f.config_hash.clone()));
    match &args.output {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            write_report(&file, &dir.join("report.json"))?;
            if let Some(trace) = &report.reward {
                write_reward_csv(trace, &dir.join("reward.csv"))?;
            }
        }
        None => print!("{}", file.to_json()),
    }
    Ok(())
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let scenario = Scenario::parse(&args.scenario).ok_or_else(|| Error::UnknownFormat(args.scenario.clone()))?;
    let opts = SynthOptions {
        frames: args.frames,
        width: args.width,
        height: args.height,
        sigma: args.sigma,
        outlier_fraction: args.outliers,
        seed: args.seed,
        map_scale: args.map_scale,
        show_seat: args.show_seat,
        ..SynthOptions::default()
    };
    let (dataset, gt) = generate(scenario, &opts)?;
    save_dataset(&dataset, &args.output)?;
    write_ground_truth(&gt, &args.output)?;
    logging::event(
        "synth_done",
        json!({ "scenario": scenario.name(), "frames": opts.frames, "planes": gt.planes.len(), "output": args.output.display().to_string() }),
    );
    Ok(())
}

pub fn cmd_export(args: &ExportArgs) -> Result<()> {
    let format: ExportFormat = args.format.parse()?;
    let file = read_primitive_file(&args.primitives)?;
    let path = export(&file, format, &args.output)?;
    logging::event("export_done", json!({ "path": path.display().to_string() }));
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Export(a) => cmd_export(a),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    logging::init(cli.quiet);
    match run(&cli) {
        Ok(()) => crate::error::EXIT_OK,
        Err(e) => {
            let rec = json!({ "level": "error", "error": e.kind(), "message": e.to_string() });
            eprintln!("{rec}");
            e.exit_code()
        }
    }
}
