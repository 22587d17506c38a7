//! Command-line front end. [`run`] returns the process exit code:
//! 0 success, 2 input error, 3 synthesis with zero passes, 4 validation or
//! self-check failure.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use demosyn_core::demonstration::{SeedObject, SegmentationParams};
use demosyn_core::geometry::CameraModel;
use demosyn_core::harness::{pour_fixture, reorient_fixture, render_observation, static_demo, WorkspaceSpec};
use demosyn_core::kinematics::ArmPair;
use demosyn_core::perception::{estimate_pose, estimate_pose_with_fallback, PerceptionParams, PoseMode};
use demosyn_core::synthesis::{scene_at, DatasetContext, PreparedDemo, SynthesisConfig, SynthesisMode};
use serde::{Deserialize, Serialize};

use crate::checks::{diffusion_checks, DiffusionCheckConfig};
use crate::dataset::{
    load_manifest, manifest_arms, validate_dataset, write_dataset, Manifest, RunInputs, RunStats, STATS_FILE,
};
use crate::formats::{
    load_arm, load_camera, load_demo, load_depth, load_mask, load_task, save_arm, save_camera, save_demo, save_depth,
    save_mask, to_json_text, write_json, BlockReport, DemoFile, SceneObjectRecord, SeedObjectRecord, TaskRecord,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ZERO_PASS: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

pub const SCENE_FORMAT: &str = "demosyn-scene/1";

#[derive(Debug, Parser)]
#[command(name = "demosyn", version, about = "Synthesize bimanual demonstration datasets from one seed demonstration")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment a demonstration into blocks and primitives.
    Decompose(DecomposeArgs),
    /// Estimate an object pose from a mask, depth image and camera.
    Perceive(PerceiveArgs),
    /// Render one enumerated scene to mask, depth and camera files.
    Render(RenderArgs),
    /// Synthesize a dataset over every scene of a task.
    Synthesize(SynthesizeArgs),
    /// Re-check a dataset directory: digest, file hashes, IK and collisions.
    Validate(ValidateArgs),
    /// Print the counts and coverage of a dataset directory.
    Stats(StatsArgs),
    /// Run the diffusion numerics self-checks.
    DiffusionCheck(DiffusionCheckArgs),
    /// Write the built-in reference task, demo, arm and camera files.
    Fixtures(FixturesArgs),
}

/// Segmentation thresholds; unset flags keep the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Thresholds {
    /// Minimal motion saliency δ, meters.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Static tolerance ζ, meters.
    #[arg(long)]
    pub zeta: Option<f64>,
    /// Primitive distance bound γ, meters.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Primitive duration bound, seconds.
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    /// Rotation weight β, meters per radian.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Shortest pause that separates blocks, seconds.
    #[arg(long = "pause-span")]
    pub pause_span: Option<f64>,
    /// Gripper-to-object distance counted as contact, meters.
    #[arg(long = "contact-eps")]
    pub contact_eps: Option<f64>,
}

impl Thresholds {
    pub fn segmentation(&self) -> SegmentationParams {
        let d = SegmentationParams::default();
        SegmentationParams {
            delta: self.delta.unwrap_or(d.delta),
            zeta: self.zeta.unwrap_or(d.zeta),
            gamma: self.gamma.unwrap_or(d.gamma),
            t_max: self.t_max.unwrap_or(d.t_max),
            beta: self.beta.unwrap_or(d.beta),
            pause_span: self.pause_span.unwrap_or(d.pause_span),
        }
    }

    fn apply(&self, config: &mut SynthesisConfig) -> Result<(), CliError> {
        config.segmentation = self.segmentation();
        if let Some(e) = self.contact_eps {
            config.validation.contact_eps = e;
        }
        let s = config.segmentation;
        let all = [s.delta, s.zeta, s.gamma, s.t_max, s.beta, s.pause_span, config.validation.contact_eps];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(CliError::Input("thresholds must be positive and finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ArmArgs {
    /// Left arm description; defaults to the reference rig.
    #[arg(long = "left-arm")]
    pub left_arm: Option<PathBuf>,
    /// Right arm description; defaults to the reference rig.
    #[arg(long = "right-arm")]
    pub right_arm: Option<PathBuf>,
}

impl ArmArgs {
    fn load(&self, default: &ArmPair) -> Result<ArmPair, CliError> {
        Ok(ArmPair {
            left: match &self.left_arm {
                Some(p) => load_arm(p)?,
                None => default.left.clone(),
            },
            right: match &self.right_arm {
                Some(p) => load_arm(p)?,
                None => default.right.clone(),
            },
        })
    }
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub demo: PathBuf,
    #[command(flatten)]
    pub thresholds: Thresholds,
    /// Write the block report here instead of only printing the table.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PerceiveArgs {
    #[arg(long)]
    pub mask: PathBuf,
    #[arg(long)]
    pub depth: PathBuf,
    #[arg(long)]
    pub camera: PathBuf,
    /// PCA over all 3D points instead of the top surface.
    #[arg(long = "full-3d")]
    pub full_3d: bool,
    /// Table height in world z.
    #[arg(long = "table-z", default_value_t = 0.0)]
    pub table_z: f64,
    /// Fall back to identity yaw on rotationally symmetric masks.
    #[arg(long)]
    pub fallback: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub task: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    /// Camera description; defaults to the reference top-down camera.
    #[arg(long)]
    pub camera: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    GroundTruth,
    Perception,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    #[arg(long)]
    pub task: PathBuf,
    #[arg(long)]
    pub demo: PathBuf,
    #[command(flatten)]
    pub arms: ArmArgs,
    /// Camera for perception mode; defaults to the reference camera.
    #[arg(long)]
    pub camera: Option<PathBuf>,
    /// Dataset directory; defaults to `<output-root>/<task name>-<seed>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long = "output-root", env = "DEMOSYN_OUTPUT_ROOT", default_value = "runs")]
    pub output_root: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::GroundTruth)]
    pub mode: ModeArg,
    #[command(flatten)]
    pub thresholds: Thresholds,
    /// Size-offset gain λ; defaults to the task's value.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Largest joint-space step of the path check, radians.
    #[arg(long = "path-resolution")]
    pub path_resolution: Option<f64>,
    #[arg(long = "full-3d")]
    pub full_3d: bool,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Replace an existing non-empty output directory.
    #[arg(long)]
    pub overwrite: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Arm descriptions; default to the arms recorded in the manifest.
    #[command(flatten)]
    pub arms: ArmArgs,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub dataset: PathBuf,
}

#[derive(Debug, Args)]
pub struct DiffusionCheckArgs {
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long, default_value_t = 8)]
    pub horizon: usize,
    #[arg(long, default_value_t = 100_000)]
    pub draws: usize,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct FixturesArgs {
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    ZeroPass(String),
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::ZeroPass(_) => EXIT_ZERO_PASS,
            CliError::Validation(_) => EXIT_VALIDATION,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::ZeroPass(m) | CliError::Validation(m) => m,
        }
    }
}

impl From<crate::formats::FormatError> for CliError {
    fn from(e: crate::formats::FormatError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<crate::dataset::DatasetError> for CliError {
    fn from(e: crate::dataset::DatasetError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn io_input(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Input(format!("{}: {e}", path.display()))
}

/// Runs a parsed command, writing tables to `out` and diagnostics to `err`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut text = String::new();
    let mut warn = String::new();
    let result = match &cli.command {
        Command::Decompose(a) => cmd_decompose(a, &mut text),
        Command::Perceive(a) => cmd_perceive(a, &mut text),
        Command::Render(a) => cmd_render(a, &mut text),
        Command::Synthesize(a) => cmd_synthesize(a, &mut text, err),
        Command::Validate(a) => cmd_validate(a, &mut text, &mut warn),
        Command::Stats(a) => cmd_stats(a, &mut text),
        Command::DiffusionCheck(a) => cmd_diffusion_check(a, &mut text),
        Command::Fixtures(a) => cmd_fixtures(a, &mut text),
    };
    let _ = out.write_all(text.as_bytes());
    let _ = err.write_all(warn.as_bytes());
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}

pub fn reference_workspace() -> WorkspaceSpec {
    WorkspaceSpec::default()
}

fn load_demo_input(path: &Path) -> Result<DemoFile, CliError> {
    Ok(load_demo(path)?)
}

fn kebab(s: impl std::fmt::Debug) -> String {
    let raw = format!("{s:?}");
    let mut o = String::new();
    for (i, c) in raw.chars().enumerate() {
        if c.is_uppercase() && i > 0 {
            o.push('-');
        }
        o.push(c.to_ascii_lowercase());
    }
    o
}

pub fn cmd_decompose(a: &DecomposeArgs, out: &mut String) -> Result<(), CliError> {
    let file = load_demo_input(&a.demo)?;
    let mut config = SynthesisConfig::default();
    a.thresholds.apply(&mut config)?;
    let prepared = PreparedDemo::new(file.demo, &config, &file.overrides)
        .map_err(|e| CliError::Input(format!("{}: {e}", a.demo.display())))?;
    let d = &prepared.decomposition;
    let report = BlockReport::new(prepared.demo.task_id(), prepared.demo.samples().len(), d);
    if let Some(p) = &a.out {
        write_json(p, &report)?;
    }
    let _ = writeln!(
        out,
        "task {}: {} samples, {} blocks, {} primitives",
        report.task_id,
        report.samples,
        d.blocks.len(),
        report.aep_count
    );
    let _ = writeln!(out, "{:>5} {:>6} {:>6}  {:<17} {:<9} {:<12} {:>4}", "block", "start", "end", "category", "kind", "bound", "aeps");
    for (i, (b, aeps)) in d.blocks.iter().zip(&d.aeps).enumerate() {
        let kind = b.kind.map(kebab).unwrap_or_else(|| "-".into());
        let bound = match (&b.bound_object, b.bound_arm) {
            (Some(o), Some(arm)) => format!("{o}@{}", kebab(arm)),
            (Some(o), None) => o.clone(),
            _ => "-".into(),
        };
        let _ = writeln!(
            out,
            "{i:>5} {:>6} {:>6}  {:<17} {:<9} {:<12} {:>4}{}",
            b.start,
            b.end,
            kebab(b.category),
            kind,
            bound,
            aeps.len(),
            if b.ambiguous { "  (ambiguous)" } else { "" }
        );
    }
    Ok(())
}

fn parse_perception_params(full_3d: bool, table_z: f64) -> PerceptionParams {
    PerceptionParams {
        mode: if full_3d { PoseMode::Full3D } else { PoseMode::Planar },
        table_z,
        ..PerceptionParams::default()
    }
}

pub fn cmd_perceive(a: &PerceiveArgs, out: &mut String) -> Result<(), CliError> {
    let mask = load_mask(&a.mask)?;
    let depth = load_depth(&a.depth)?;
    let cam = load_camera(&a.camera)?;
    let params = parse_perception_params(a.full_3d, a.table_z);
    let est = if a.fallback {
        estimate_pose_with_fallback(&mask, &depth, &cam, &params)
    } else {
        estimate_pose(&mask, &depth, &cam, &params)
    }
    .map_err(|e| CliError::Input(format!("{}: {e}", a.mask.display())))?;
    let rec = SeedObjectRecord::from(&SeedObject {
        estimate: est,
        ground_truth: None,
    });
    match &a.out {
        Some(p) => {
            write_json(p, &rec)?;
            let t = est.pose.translation;
            let _ = writeln!(
                out,
                "position {:.4} {:.4} {:.4}  yaw {:.2} deg  bbox {:.4} x {:.4} x {:.4}{}",
                t.x,
                t.y,
                t.z,
                est.pose.rotation.yaw().to_degrees(),
                est.bbox.l,
                est.bbox.w,
                est.bbox.h,
                if est.degenerate { "  (degenerate)" } else { "" }
            );
        }
        None => out.push_str(&to_json_text(&rec)),
    }
    Ok(())
}

/// `scene.json` written by `render`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub format: String,
    pub scene_index: usize,
    pub scene_seed: u64,
    pub table_z: f64,
    pub objects: Vec<SceneObjectRecord>,
}

pub fn cmd_render(a: &RenderArgs, out: &mut String) -> Result<(), CliError> {
    let spec = load_task(&a.task)?;
    let count = spec.scene_count();
    if a.index >= count {
        return Err(CliError::Input(format!("scene index {} out of range (task has {count} scenes)", a.index)));
    }
    let cam = match &a.camera {
        Some(p) => load_camera(p)?,
        None => reference_workspace().camera(),
    };
    let scene = scene_at(&spec, a.seed, a.index);
    let obs = render_observation(&scene, &cam, spec.table_z).map_err(|e| CliError::Input(e.to_string()))?;
    fs::create_dir_all(&a.out).map_err(io_input(&a.out))?;
    save_camera(&a.out.join("camera.json"), &cam)?;
    save_depth(&a.out.join("depth.pf32"), &obs.depth)?;
    write_json(
        &a.out.join("scene.json"),
        &SceneRecord {
            format: SCENE_FORMAT.into(),
            scene_index: scene.index,
            scene_seed: scene.scene_seed,
            table_z: spec.table_z,
            objects: scene.objects.values().map(SceneObjectRecord::from).collect(),
        },
    )?;
    let _ = writeln!(out, "scene {} (seed {:#018x}): {} objects", scene.index, scene.scene_seed, obs.masks.len());
    for (id, mask) in &obs.masks {
        let name = format!("{id}.mask.pgm");
        save_mask(&a.out.join(&name), mask)?;
        let _ = writeln!(out, "  {name:<24} {:>7} px", mask.count());
    }
    Ok(())
}

fn default_out(a: &SynthesizeArgs, task_name: &str) -> PathBuf {
    let name: String = task_name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    a.output_root.join(format!("{name}-{}", a.seed))
}

/// Counts table shared by `synthesize` and `stats`.
fn counts_table(out: &mut String, m: &Manifest) {
    let s = &m.body.stats;
    let pct = |n: usize| if s.attempts == 0 { 0.0 } else { 100.0 * n as f64 / s.attempts as f64 };
    let _ = writeln!(out, "task              {}", m.body.task.name);
    let _ = writeln!(out, "seed demo         {}", m.body.seed_demo);
    let _ = writeln!(out, "master seed       {}", m.body.master_seed);
    let _ = writeln!(out, "mode              {}", kebab(m.body.config.mode));
    let _ = writeln!(out, "attempts          {:>7}", s.attempts);
    let _ = writeln!(out, "pass              {:>7}  {:6.2}%", s.passes, pct(s.passes));
    let _ = writeln!(out, "reject_ik         {:>7}  {:6.2}%", s.reject_ik, pct(s.reject_ik));
    let _ = writeln!(out, "reject_collision  {:>7}  {:6.2}%", s.reject_collision, pct(s.reject_collision));
    let _ = writeln!(out, "reject_perception {:>7}  {:6.2}%", s.reject_perception, pct(s.reject_perception));
    let _ = writeln!(out, "digest            {}", m.digest);
}

pub fn cmd_synthesize(a: &SynthesizeArgs, out: &mut String, err: &mut dyn Write) -> Result<(), CliError> {
    let spec = load_task(&a.task)?;
    let file = load_demo_input(&a.demo)?;
    let ws = reference_workspace();
    let arms = a.arms.load(&ws.arms())?;
    let camera: CameraModel = match &a.camera {
        Some(p) => load_camera(p)?,
        None => ws.camera(),
    };
    let mut config = SynthesisConfig {
        mode: match a.mode {
            ModeArg::GroundTruth => SynthesisMode::GroundTruth,
            ModeArg::Perception => SynthesisMode::Perception,
        },
        lambda: a.lambda.unwrap_or(spec.lambda),
        perception: parse_perception_params(a.full_3d, spec.table_z),
        ..SynthesisConfig::default()
    };
    a.thresholds.apply(&mut config)?;
    if !(config.lambda > 0.0 && config.lambda <= 2.0) {
        return Err(CliError::Input("--lambda must lie in (0, 2]".into()));
    }
    if let Some(r) = a.path_resolution {
        if !(r.is_finite() && r > 0.0) {
            return Err(CliError::Input("--path-resolution must be positive".into()));
        }
        config.validation.path_resolution = r;
    }
    if a.threads == Some(0) {
        return Err(CliError::Input("--threads must be at least 1".into()));
    }
    let prepared = PreparedDemo::new(file.demo, &config, &file.overrides)
        .map_err(|e| CliError::Input(format!("{}: {e}", a.demo.display())))?;
    let out_dir = a.out.clone().unwrap_or_else(|| default_out(a, &spec.name));
    let inputs = RunInputs {
        ctx: DatasetContext {
            prepared: &prepared,
            spec: &spec,
            master_seed: a.seed,
            arms: &arms,
            camera: &camera,
            config: &config,
        },
        threads: a.threads,
        overwrite: a.overwrite,
        fail_after: None,
    };
    let summary = write_dataset(&inputs, &out_dir, |_, _| {})?;
    let _ = writeln!(out, "dataset           {}", out_dir.display());
    counts_table(out, &summary.manifest);
    let r = &summary.run_stats;
    let _ = writeln!(
        out,
        "throughput        {:.1} attempts/s ({:.2} s, {} threads)",
        r.attempts_per_second, r.elapsed_seconds, r.threads
    );
    let s = &summary.manifest.body.stats;
    if s.attempts == 0 {
        let _ = writeln!(err, "warning: the task enumerates no scenes");
    } else if s.passes == 0 {
        return Err(CliError::ZeroPass(format!(
            "no scene passed validation; see {}",
            out_dir.join(crate::dataset::REJECTS_FILE).display()
        )));
    }
    Ok(())
}

pub fn cmd_validate(a: &ValidateArgs, out: &mut String, warn: &mut String) -> Result<(), CliError> {
    let manifest = load_manifest(&a.dataset)?;
    let recorded = manifest_arms(&a.dataset, &manifest)?;
    let arms = a.arms.load(&recorded)?;
    let check = validate_dataset(&a.dataset, &arms)?;
    for w in &check.warnings {
        let _ = writeln!(warn, "warning: {w}");
    }
    for f in &check.failures {
        let _ = writeln!(out, "FAIL {}: {}", f.name, f.reason);
    }
    let _ = writeln!(
        out,
        "{} trajectories checked, {} failures, digest {}",
        check.trajectories,
        check.failures.len(),
        if check.digest_ok { "ok" } else { "MISMATCH" }
    );
    if check.ok() {
        Ok(())
    } else {
        let first = check.failures.first().map(|f| f.name.as_str()).unwrap_or("manifest.json");
        Err(CliError::Validation(format!("dataset failed validation (first failure: {first})")))
    }
}

pub fn cmd_stats(a: &StatsArgs, out: &mut String) -> Result<(), CliError> {
    let m = load_manifest(&a.dataset)?;
    counts_table(out, &m);
    let stats_path = a.dataset.join(STATS_FILE);
    if stats_path.exists() {
        let r: RunStats = crate::formats::read_json(&stats_path)?;
        let _ = writeln!(
            out,
            "throughput        {:.1} attempts/s ({:.2} s, {} threads)",
            r.attempts_per_second, r.elapsed_seconds, r.threads
        );
    }
    for (role, g) in &m.body.stats.coverage {
        let _ = writeln!(out, "coverage {role} ({}x{}, passes/attempts)", g.rows, g.cols);
        for r in 0..g.rows {
            let row: Vec<String> = (0..g.cols)
                .map(|c| format!("{:>3}/{:<3}", g.passes[r * g.cols + c], g.attempts[r * g.cols + c]))
                .collect();
            let _ = writeln!(out, "  {}", row.join(" "));
        }
    }
    Ok(())
}

pub fn cmd_diffusion_check(a: &DiffusionCheckArgs, out: &mut String) -> Result<(), CliError> {
    if a.steps == 0 || a.horizon == 0 || a.draws < 2 || !(0.0..=1.0).contains(&a.rho) {
        return Err(CliError::Input("need steps ≥ 1, horizon ≥ 1, draws ≥ 2 and rho in [0, 1]".into()));
    }
    let cfg = DiffusionCheckConfig {
        steps: a.steps,
        horizon: a.horizon,
        draws: a.draws,
        rho: a.rho,
        seed: a.seed,
    };
    let lines = diffusion_checks(&cfg);
    let mut failed = Vec::new();
    for l in &lines {
        let _ = writeln!(out, "{} {:<24} {}", if l.passed { "PASS" } else { "FAIL" }, l.name, l.detail);
        if !l.passed {
            failed.push(l.name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("failed checks: {}", failed.join(", "))))
    }
}

/// Writes the reference rig and the built-in tasks.
pub fn write_fixtures(dir: &Path) -> Result<Vec<String>, CliError> {
    fs::create_dir_all(dir).map_err(io_input(dir))?;
    let ws = reference_workspace();
    let arms = ws.arms();
    let mut written = Vec::new();
    let mut put = |name: &str| {
        written.push(name.to_string());
        dir.join(name)
    };
    save_arm(&put("left-arm.json"), &arms.left)?;
    save_arm(&put("right-arm.json"), &arms.right)?;
    save_camera(&put("camera.json"), &ws.camera())?;
    for (name, fx) in [("reorient", reorient_fixture()), ("pour", pour_fixture())] {
        save_demo(&put(&format!("{name}.demo.json")), &fx.demo, &fx.overrides)?;
        write_json(&put(&format!("{name}.task.json")), &TaskRecord::from(&fx.spec))?;
    }
    save_demo(&put("static.demo.json"), &static_demo(), &BTreeMap::new())?;
    Ok(written)
}

pub fn cmd_fixtures(a: &FixturesArgs, out: &mut String) -> Result<(), CliError> {
    for name in write_fixtures(&a.out)? {
        let _ = writeln!(out, "{}", a.out.join(name).display());
    }
    Ok(())
}
