//! Dataset directories: parallel synthesis into a staging directory,
//! manifest with content digest, and re-validation from disk.
//!
//! Layout of a run directory:
//!
//! ```text
//! manifest.json            run echo, counts, per-file sha256, digest
//! stats.json               counts plus wall-clock timing (not digested)
//! rejects.log              one line per rejected scene
//! trajectories/traj_NNNNNN.json
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use demosyn_core::demonstration::{ArmBases, SegmentationParams};
use demosyn_core::kinematics::ArmPair;
use demosyn_core::perception::PoseMode;
use demosyn_core::synthesis::{
    deliver, validate_keyposes, DatasetContext, DatasetStats, Outcome, SceneResult, SynthesisConfig, SynthesisMode,
    SynthesizedTrajectory, TrajectorySink, ValidationParams, ValidationReport,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::formats::{
    read_json, to_json_text, ArmRecord, CameraRecord, FormatError, TaskRecord, TrajectoryRecord,
};

pub const MANIFEST_FORMAT: &str = "demosyn-manifest/1";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const STATS_FILE: &str = "stats.json";
pub const REJECTS_FILE: &str = "rejects.log";
pub const TRAJECTORY_DIR: &str = "trajectories";

/// Scenes synthesized in parallel before their results are written.
const CHUNK: usize = 256;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("sink failure: {0}")]
    Sink(String),
    #[error("{0}")]
    Config(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeRecord {
    GroundTruth,
    Perception,
}

impl From<SynthesisMode> for ModeRecord {
    fn from(m: SynthesisMode) -> Self {
        match m {
            SynthesisMode::GroundTruth => ModeRecord::GroundTruth,
            SynthesisMode::Perception => ModeRecord::Perception,
        }
    }
}

impl From<ModeRecord> for SynthesisMode {
    fn from(m: ModeRecord) -> Self {
        match m {
            ModeRecord::GroundTruth => SynthesisMode::GroundTruth,
            ModeRecord::Perception => SynthesisMode::Perception,
        }
    }
}

/// Thresholds of a run. IK tolerances are fixed by the build and not echoed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigRecord {
    pub mode: ModeRecord,
    pub delta: f64,
    pub zeta: f64,
    pub gamma: f64,
    pub t_max: f64,
    pub beta: f64,
    pub pause_span: f64,
    pub lambda: f64,
    pub contact_eps: f64,
    pub path_resolution: f64,
    pub full_3d: bool,
}

impl From<&SynthesisConfig> for ConfigRecord {
    fn from(c: &SynthesisConfig) -> Self {
        let s = c.segmentation;
        Self {
            mode: c.mode.into(),
            delta: s.delta,
            zeta: s.zeta,
            gamma: s.gamma,
            t_max: s.t_max,
            beta: s.beta,
            pause_span: s.pause_span,
            lambda: c.lambda,
            contact_eps: c.validation.contact_eps,
            path_resolution: c.validation.path_resolution,
            full_3d: c.perception.mode == PoseMode::Full3D,
        }
    }
}

impl ConfigRecord {
    pub fn to_config(&self) -> SynthesisConfig {
        let mut c = SynthesisConfig::default();
        c.mode = self.mode.into();
        c.segmentation = SegmentationParams {
            delta: self.delta,
            zeta: self.zeta,
            gamma: self.gamma,
            t_max: self.t_max,
            beta: self.beta,
            pause_span: self.pause_span,
        };
        c.lambda = self.lambda;
        c.validation = ValidationParams {
            contact_eps: self.contact_eps,
            path_resolution: self.path_resolution,
            ..c.validation
        };
        if self.full_3d {
            c.perception.mode = PoseMode::Full3D;
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageRecord {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows × cols`.
    pub attempts: Vec<usize>,
    pub passes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRecord {
    pub attempts: usize,
    pub passes: usize,
    pub reject_ik: usize,
    pub reject_collision: usize,
    pub reject_perception: usize,
    pub pass_rate: f64,
    pub coverage: BTreeMap<String, CoverageRecord>,
}

impl From<&DatasetStats> for StatsRecord {
    fn from(s: &DatasetStats) -> Self {
        Self {
            attempts: s.attempts,
            passes: s.passes,
            reject_ik: s.reject_ik,
            reject_collision: s.reject_collision,
            reject_perception: s.reject_perception,
            pass_rate: s.pass_rate(),
            coverage: s
                .coverage
                .iter()
                .map(|(k, g)| {
                    (
                        k.clone(),
                        CoverageRecord {
                            rows: g.rows,
                            cols: g.cols,
                            attempts: g.cells.iter().map(|c| c.attempts).collect(),
                            passes: g.cells.iter().map(|c| c.passes).collect(),
                        },
                    )
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmsRecord {
    pub left: ArmRecord,
    pub right: ArmRecord,
}

/// Everything in the manifest except the digest, which is the sha256 of
/// this body's JSON text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestBody {
    pub format: String,
    pub seed_demo: String,
    pub master_seed: u64,
    pub config: ConfigRecord,
    pub task: TaskRecord,
    pub arms: ArmsRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub camera: Option<CameraRecord>,
    pub stats: StatsRecord,
    pub files: Vec<FileEntry>,
}

impl ManifestBody {
    pub fn digest(&self) -> String {
        sha256_hex(to_json_text(self).as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(flatten)]
    pub body: ManifestBody,
    pub digest: String,
}

/// `stats.json`: counts plus timing of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    #[serde(flatten)]
    pub stats: StatsRecord,
    pub elapsed_seconds: f64,
    pub attempts_per_second: f64,
    pub threads: usize,
}

pub fn trajectory_file_name(scene_index: usize) -> String {
    format!("{TRAJECTORY_DIR}/traj_{scene_index:06}.json")
}

/// First failing block's detail, or the outcome label.
fn reject_detail(report: &ValidationReport) -> String {
    report
        .blocks
        .iter()
        .find(|b| !(b.ik_ok && b.path_ok))
        .and_then(|b| b.detail.clone())
        .unwrap_or_else(|| report.outcome.label().to_string())
}

fn outcome_text(o: &Outcome) -> String {
    match o {
        Outcome::Pass => "pass".into(),
        Outcome::RejectPerception { object } => format!("reject_perception object={object}"),
        Outcome::RejectIk { block } => format!("reject_ik block={block}"),
        Outcome::RejectCollision { block } => format!("reject_collision block={block}"),
    }
}

/// Writes passing trajectories as files and collects the rejects log.
pub struct DirSink {
    root: PathBuf,
    bases: ArmBases,
    files: Vec<FileEntry>,
    rejects: String,
    fail_after: Option<usize>,
}

impl DirSink {
    pub fn new(root: &Path, bases: ArmBases) -> Result<Self, DatasetError> {
        let dir = root.join(TRAJECTORY_DIR);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(Self {
            root: root.to_path_buf(),
            bases,
            files: Vec::new(),
            rejects: String::new(),
            fail_after: None,
        })
    }

    /// Fails every write once `n` trajectories are stored; for exercising
    /// the cleanup path.
    pub fn fail_after(mut self, n: usize) -> Self {
        self.fail_after = Some(n);
        self
    }

    fn finish(mut self) -> Result<Vec<FileEntry>, DatasetError> {
        let path = self.root.join(REJECTS_FILE);
        fs::write(&path, &self.rejects).map_err(io_err(&path))?;
        self.files.push(FileEntry {
            name: REJECTS_FILE.into(),
            sha256: sha256_hex(self.rejects.as_bytes()),
        });
        Ok(self.files)
    }
}

impl TrajectorySink for DirSink {
    type Error = DatasetError;

    fn accept(&mut self, t: &SynthesizedTrajectory) -> Result<(), DatasetError> {
        if self.fail_after.is_some_and(|n| self.files.len() >= n) {
            return Err(DatasetError::Sink("injected write failure".into()));
        }
        let name = trajectory_file_name(t.provenance.scene_index);
        let text = to_json_text(&TrajectoryRecord::new(t, &self.bases));
        let path = self.root.join(&name);
        fs::write(&path, &text).map_err(|e| DatasetError::Sink(format!("{}: {e}", path.display())))?;
        self.files.push(FileEntry {
            name,
            sha256: sha256_hex(text.as_bytes()),
        });
        Ok(())
    }

    fn reject(&mut self, scene_index: usize, report: &ValidationReport) -> Result<(), DatasetError> {
        let _ = writeln!(
            self.rejects,
            "{scene_index:06}\t{}\t{}",
            outcome_text(&report.outcome),
            reject_detail(report).replace(['\t', '\n'], " ")
        );
        Ok(())
    }
}

/// Runs scenes in parallel chunks and delivers them in index order, so the
/// sink sees the same sequence for any thread count.
pub fn run_parallel<S: TrajectorySink>(
    ctx: &DatasetContext<'_>,
    pool: &rayon::ThreadPool,
    sink: &mut S,
    mut progress: impl FnMut(usize, usize),
) -> Result<DatasetStats, S::Error> {
    let total = ctx.spec.scene_count();
    let mut stats = DatasetStats::new(ctx.spec);
    let mut start = 0;
    while start < total {
        let end = (start + CHUNK).min(total);
        let results: Vec<SceneResult> = pool.install(|| (start..end).into_par_iter().map(|i| ctx.run_scene(i)).collect());
        for r in &results {
            deliver(r, &mut stats, sink)?;
        }
        progress(end, total);
        start = end;
    }
    Ok(stats)
}

/// Inputs of [`write_dataset`] that are echoed into the manifest.
pub struct RunInputs<'a> {
    pub ctx: DatasetContext<'a>,
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
    /// Replace an existing output directory.
    pub overwrite: bool,
    /// Fail the run once this many trajectories are written.
    pub fail_after: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub manifest: Manifest,
    pub run_stats: RunStats,
}

fn staging_dir(out: &Path) -> PathBuf {
    let name = out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "dataset".into());
    out.with_file_name(format!(".{name}.staging-{}", std::process::id()))
}

/// Synthesizes every scene into `out`. Output is staged next to `out` and
/// moved into place only after the manifest is written; any failure removes
/// the staging directory.
pub fn write_dataset(inputs: &RunInputs<'_>, out: &Path, progress: impl FnMut(usize, usize)) -> Result<RunSummary, DatasetError> {
    let ctx = &inputs.ctx;
    let bases = ctx.arms.bases();
    if !bases_match(&bases, ctx.prepared.demo.arm_bases()) {
        return Err(DatasetError::Config(
            "arm bases of the arm descriptions differ from the demonstration's arm_bases".into(),
        ));
    }
    if out.exists() {
        let empty = out.is_dir() && fs::read_dir(out).map_err(io_err(out))?.next().is_none();
        if !empty && !inputs.overwrite {
            return Err(DatasetError::Config(format!(
                "{} exists and is not empty (pass --overwrite to replace it)",
                out.display()
            )));
        }
    }
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let stage = staging_dir(out);
    if stage.exists() {
        fs::remove_dir_all(&stage).map_err(io_err(&stage))?;
    }
    let result = stage_run(inputs, &stage, progress);
    match result {
        Ok(summary) => {
            if out.exists() {
                fs::remove_dir_all(out).map_err(io_err(out))?;
            }
            fs::rename(&stage, out).map_err(io_err(out))?;
            Ok(summary)
        }
        Err(e) => {
            let _ = fs::remove_dir_all(&stage);
            Err(e)
        }
    }
}

pub fn build_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, DatasetError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n.max(1));
    }
    b.build().map_err(|e| DatasetError::Config(format!("thread pool: {e}")))
}

fn stage_run(inputs: &RunInputs<'_>, stage: &Path, progress: impl FnMut(usize, usize)) -> Result<RunSummary, DatasetError> {
    let ctx = &inputs.ctx;
    let mut sink = DirSink::new(stage, ctx.arms.bases())?;
    if let Some(n) = inputs.fail_after {
        sink = sink.fail_after(n);
    }
    let pool = build_pool(inputs.threads)?;
    let t0 = Instant::now();
    let stats = run_parallel(ctx, &pool, &mut sink, progress)?;
    let elapsed = t0.elapsed().as_secs_f64();
    let files = sink.finish()?;
    let body = ManifestBody {
        format: MANIFEST_FORMAT.into(),
        seed_demo: ctx.prepared.demo.task_id().into(),
        master_seed: ctx.master_seed,
        config: ctx.config.into(),
        task: ctx.spec.into(),
        arms: ArmsRecord {
            left: (&ctx.arms.left).into(),
            right: (&ctx.arms.right).into(),
        },
        camera: (ctx.config.mode == SynthesisMode::Perception).then(|| ctx.camera.into()),
        stats: (&stats).into(),
        files,
    };
    let manifest = Manifest {
        digest: body.digest(),
        body,
    };
    let run_stats = RunStats {
        stats: (&stats).into(),
        elapsed_seconds: elapsed,
        attempts_per_second: if elapsed > 0.0 { stats.attempts as f64 / elapsed } else { 0.0 },
        threads: pool.current_num_threads(),
    };
    let path = stage.join(MANIFEST_FILE);
    fs::write(&path, to_json_text(&manifest)).map_err(io_err(&path))?;
    let path = stage.join(STATS_FILE);
    fs::write(&path, to_json_text(&run_stats)).map_err(io_err(&path))?;
    Ok(RunSummary { manifest, run_stats })
}

pub fn bases_match(a: &ArmBases, b: &ArmBases) -> bool {
    let close = |p: &demosyn_core::geometry::RigidPose, q: &demosyn_core::geometry::RigidPose| {
        (p.translation - q.translation).norm() <= 1e-9 && p.rotation.angle_to(&q.rotation) <= 1e-9
    };
    close(&a.left, &b.left) && close(&a.right, &b.right)
}

pub fn load_manifest(dir: &Path) -> Result<Manifest, DatasetError> {
    Ok(read_json(&dir.join(MANIFEST_FILE))?)
}

/// Arms recorded in a manifest.
pub fn manifest_arms(dir: &Path, m: &Manifest) -> Result<ArmPair, DatasetError> {
    let path = dir.join(MANIFEST_FILE);
    Ok(ArmPair {
        left: m.body.arms.left.to_model(&path)?,
        right: m.body.arms.right.to_model(&path)?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileFailure {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct DatasetCheck {
    pub digest_ok: bool,
    pub trajectories: usize,
    pub failures: Vec<FileFailure>,
    pub warnings: Vec<String>,
}

impl DatasetCheck {
    pub fn ok(&self) -> bool {
        self.digest_ok && self.failures.is_empty()
    }
}

/// Checks the manifest digest and file hashes, then re-runs IK and the
/// path checks on every stored trajectory with `arms`.
pub fn validate_dataset(dir: &Path, arms: &ArmPair) -> Result<DatasetCheck, DatasetError> {
    let manifest = load_manifest(dir)?;
    let params = manifest.body.config.to_config().validation;
    let mut check = DatasetCheck {
        digest_ok: manifest.body.digest() == manifest.digest,
        ..DatasetCheck::default()
    };
    let listed: Vec<&FileEntry> = manifest.body.files.iter().collect();
    let traj_count = listed.iter().filter(|f| f.name.starts_with(TRAJECTORY_DIR)).count();
    if traj_count == 0 {
        check.warnings.push("dataset holds no trajectories".into());
    }
    let fail = |check: &mut DatasetCheck, name: &str, reason: String| {
        check.failures.push(FileFailure {
            name: name.to_string(),
            reason,
        })
    };
    for entry in listed {
        let path = dir.join(&entry.name);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) => {
                fail(&mut check, &entry.name, format!("unreadable: {e}"));
                continue;
            }
        };
        if sha256_hex(&bytes) != entry.sha256 {
            fail(&mut check, &entry.name, "sha256 differs from the manifest".into());
        }
        if !entry.name.starts_with(TRAJECTORY_DIR) {
            continue;
        }
        check.trajectories += 1;
        let loaded = std::str::from_utf8(&bytes)
            .map_err(|e| FormatError::invalid(&path, e.to_string()))
            .and_then(|text| crate::formats::parse_json::<TrajectoryRecord>(&path, text))
            .and_then(|r| r.to_trajectory(&path));
        let (traj, bases) = match loaded {
            Ok(t) => t,
            Err(e) => {
                fail(&mut check, &entry.name, e.to_string());
                continue;
            }
        };
        if !bases_match(&bases, &arms.bases()) {
            fail(&mut check, &entry.name, "arm bases differ from the arm descriptions".into());
            continue;
        }
        if !traj.validation.outcome.is_pass() {
            fail(&mut check, &entry.name, format!("stored outcome is {}", traj.validation.outcome.label()));
            continue;
        }
        let report = validate_keyposes(&traj.validation_input(), arms, &params);
        if !report.outcome.is_pass() {
            fail(
                &mut check,
                &entry.name,
                format!("re-validation: {} ({})", outcome_text(&report.outcome), reject_detail(&report)),
            );
        }
    }
    let on_disk = dir.join(TRAJECTORY_DIR);
    if let Ok(rd) = fs::read_dir(&on_disk) {
        let mut extra: Vec<String> = rd
            .filter_map(Result::ok)
            .map(|e| format!("{TRAJECTORY_DIR}/{}", e.file_name().to_string_lossy()))
            .filter(|n| !manifest.body.files.iter().any(|f| &f.name == n))
            .collect();
        extra.sort();
        for n in extra {
            check.warnings.push(format!("{n} is not listed in the manifest"));
        }
    }
    Ok(check)
}
