//! Command-line interface: argument parsing and subcommand dispatch.
//!
//! Everything routes through [`dispatch_with`], which writes to caller-owned
//! streams and returns the process exit code (0 success, 1 operational
//! failure, 2 usage error), so the whole surface is testable in-process.
//! Set `TRACKKIT_LOG` (standard `env_logger` syntax) to see diagnostics.

use std::ffi::OsString;
use std::fs::File;
use std::path::PathBuf;
use std::sync::OnceLock;

use clap::{Args, Parser, Subcommand};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::harness::{
    self, connect_endpoint, schedule_clips_with, training_sample, uniform_sample, TrackOptions,
    TrackTask, VideoSpec, DEFAULT_CLIP_LEN, DEFAULT_MAX_UNSPLIT, DEFAULT_UNIFORM_SAMPLES,
};
use crate::jsonl::read_jsonl;
use crate::kalman::DEFAULT_GATE_THRESHOLD;
use crate::metrics::eval::{evaluate_run, render_table, EvalOptions, Task};
use crate::pipeline::{run_build_dataset, BuildConfig, Thresholds};
use crate::tselector::{self, gradient_check, SelectorParams};

/// Seed used by every randomized subcommand unless overridden.
pub const DEFAULT_SEED: u64 = 17;

#[derive(Parser)]
#[command(
    name = "trackkit",
    version,
    about = "Dataset filtering, tracking orchestration, and evaluation tools",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter chunk candidates against trajectories into dataset records.
    BuildDataset(BuildDatasetArgs),
    /// Score a predictions file against ground truth.
    Evaluate(EvaluateArgs),
    /// Drive an external predictor over a videos file, clip by clip.
    Track(TrackArgs),
    /// Verify token-selector gradients against finite differences.
    CheckTselector(CheckTselectorArgs),
    /// Print the clip schedule for a video length.
    Schedule(ScheduleArgs),
    /// Print sampled frame indices for a video length.
    SampleFrames(SampleFramesArgs),
}

#[derive(Args)]
struct BuildDatasetArgs {
    /// Chunk-candidate JSONL file.
    #[arg(long)]
    chunks: PathBuf,
    /// Trajectory JSONL file.
    #[arg(long)]
    tracks: PathBuf,
    /// Output records JSONL; a `.meta.json` sidecar lands next to it.
    #[arg(long)]
    out: PathBuf,
    /// Rejection-log JSONL (default: `<out>.rejections.jsonl`).
    #[arg(long)]
    reject_log: Option<PathBuf>,
    /// Minimum first-frame grounding confidence (exclusive).
    #[arg(long, default_value_t = Thresholds::default().tau_g)]
    tau_g: f64,
    /// Minimum per-frame tracking confidence (exclusive).
    #[arg(long, default_value_t = Thresholds::default().tau_t)]
    tau_t: f64,
    /// Minimum anchor-frame overlap (inclusive).
    #[arg(long, default_value_t = Thresholds::default().tau_iou)]
    tau_iou: f64,
    /// Kalman gating threshold for the drift check.
    #[arg(long, default_value_t = DEFAULT_GATE_THRESHOLD)]
    gate: f64,
    /// Extra virtual-lemma stoplist, one lemma per line.
    #[arg(long)]
    stoplist: Option<PathBuf>,
    /// Treat missing annotations and duplicates as fatal.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long, value_enum)]
    task: Task,
    /// Ground-truth JSONL file.
    #[arg(long)]
    gt: PathBuf,
    /// Predictions JSONL file.
    #[arg(long)]
    pred: PathBuf,
    /// Also write the full JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fail on missing or malformed predictions instead of scoring misses.
    #[arg(long)]
    strict: bool,
    /// Frame width in pixels for center errors (per-video dims win).
    #[arg(long, default_value_t = EvalOptions::default().frame_w)]
    frame_width: f64,
    /// Frame height in pixels, same proviso.
    #[arg(long, default_value_t = EvalOptions::default().frame_h)]
    frame_height: f64,
}

#[derive(Args)]
struct TrackArgs {
    /// Task flavor: `sot` starts from a box, `rsot` from an expression.
    #[arg(long, value_enum)]
    mode: TrackTask,
    /// Videos JSONL file (video_id, frame_count, init_box/expression).
    #[arg(long)]
    videos: PathBuf,
    /// Predictor endpoint: `HOST:PORT` or `exec:PROGRAM ARGS...`.
    #[arg(long)]
    endpoint: String,
    /// Output predictions JSONL.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_CLIP_LEN)]
    clip_len: u64,
    /// Longest video tracked in a single request.
    #[arg(long, default_value_t = DEFAULT_MAX_UNSPLIT)]
    max_unsplit: u64,
    /// Worker count; each worker opens its own endpoint connection.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Re-sends per failed request before giving up.
    #[arg(long, default_value_t = TrackOptions::default().retries)]
    retries: u32,
    /// Abort on unparseable predictions instead of carrying the last box.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct CheckTselectorArgs {
    /// Token count of the generated input.
    #[arg(long, default_value_t = 32)]
    n: usize,
    /// Input channels.
    #[arg(long, default_value_t = 16)]
    c: usize,
    /// Gate MLP hidden width.
    #[arg(long, default_value_t = 8)]
    gate_hidden: usize,
    /// Projection output dimension.
    #[arg(long, default_value_t = 8)]
    d: usize,
    /// Tokens kept by the selector.
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-5)]
    epsilon: f64,
    /// Largest acceptable relative gradient error.
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    /// Drop score weighting so gate gradients vanish identically.
    #[arg(long)]
    pure_selection: bool,
    /// Save the checked parameters as a container file.
    #[arg(long)]
    save: Option<PathBuf>,
    /// Load parameters from a container file instead of generating them.
    #[arg(long, conflicts_with_all = ["c", "gate_hidden", "d", "k", "pure_selection"])]
    load: Option<PathBuf>,
}

#[derive(Args)]
struct ScheduleArgs {
    /// Video length in frames.
    #[arg(long)]
    frames: u64,
    #[arg(long, default_value_t = DEFAULT_CLIP_LEN)]
    clip_len: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_UNSPLIT)]
    max_unsplit: u64,
}

#[derive(Args)]
struct SampleFramesArgs {
    /// Video length in frames.
    #[arg(long)]
    frames: u64,
    /// Uniform sample size (ignored with --training).
    #[arg(long, default_value_t = DEFAULT_UNIFORM_SAMPLES)]
    n: usize,
    /// Draw a training sample (random count, interval, start) instead.
    #[arg(long)]
    training: bool,
    /// Seed for --training draws.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

fn init_logging() {
    static INIT: OnceLock<()> = OnceLock::new();
    INIT.get_or_init(|| {
        let env = env_logger::Env::new().filter("TRACKKIT_LOG");
        let _ = env_logger::Builder::from_env(env).try_init();
    });
}

/// Parses `args` (including the program name) and runs the subcommand,
/// writing human output to `out` and diagnostics to `err`.
pub fn dispatch_with<I, T>(args: I, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let stream: &mut dyn std::io::Write = if e.use_stderr() { err } else { out };
            let _ = write!(stream, "{}", e.render());
            return e.exit_code();
        }
    };
    match run(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            let mut source = e.source();
            while let Some(cause) = source {
                let _ = writeln!(err, "  caused by: {cause}");
                source = cause.source();
            }
            1
        }
    }
}

/// Runs the CLI against the real process streams and environment.
pub fn dispatch() -> i32 {
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    dispatch_with(std::env::args_os(), &mut out, &mut err)
}

type CliResult = Result<i32, Box<dyn std::error::Error>>;

fn run(command: Command, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> CliResult {
    match command {
        Command::BuildDataset(a) => run_build(a, out),
        Command::Evaluate(a) => run_evaluate(a, out, err),
        Command::Track(a) => run_track(a, out, err),
        Command::CheckTselector(a) => run_check_tselector(a, out),
        Command::Schedule(a) => {
            let clips = schedule_clips_with(a.frames, a.clip_len, a.max_unsplit)?;
            writeln!(out, "{}", serde_json::to_string(&clips)?)?;
            Ok(0)
        }
        Command::SampleFrames(a) => {
            let indices = if a.training {
                let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
                training_sample(a.frames, &mut rng)?
            } else {
                uniform_sample(a.frames, a.n)?
            };
            writeln!(out, "{}", serde_json::to_string(&indices)?)?;
            Ok(0)
        }
    }
}

fn run_build(a: BuildDatasetArgs, out: &mut dyn std::io::Write) -> CliResult {
    let config = BuildConfig {
        thresholds: Thresholds { tau_g: a.tau_g, tau_t: a.tau_t, tau_iou: a.tau_iou, gate: a.gate },
        strict: a.strict,
        stoplist: a.stoplist,
    };
    let rejects = a.reject_log.unwrap_or_else(|| a.out.with_extension("rejections.jsonl"));
    let stats = run_build_dataset(&a.chunks, &a.tracks, &a.out, &rejects, &config)?;
    writeln!(out, "candidates:             {}", stats.candidates)?;
    writeln!(out, "records kept:           {}", stats.records)?;
    for (stage, count) in &stats.rejected_by_stage {
        let label = format!("rejected at {}:", serde_plain_stage(stage));
        writeln!(out, "{label:<23} {count}")?;
    }
    writeln!(out, "orphan trajectories:    {}", stats.orphan_trajectories)?;
    writeln!(out, "duplicate trajectories: {}", stats.duplicate_trajectories)?;
    writeln!(out, "records -> {}", a.out.display())?;
    writeln!(out, "rejections -> {}", rejects.display())?;
    Ok(0)
}

fn serde_plain_stage(stage: &crate::pipeline::Stage) -> String {
    // the serde rename (snake_case) is the canonical stage spelling
    serde_json::to_value(stage)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_else(|| format!("{stage:?}"))
}

fn run_evaluate(
    a: EvaluateArgs,
    out: &mut dyn std::io::Write,
    err: &mut dyn std::io::Write,
) -> CliResult {
    let opts = EvalOptions { strict: a.strict, frame_w: a.frame_width, frame_h: a.frame_height };
    let report = evaluate_run(a.task, &a.gt, &a.pred, &opts)?;
    for warning in &report.warnings {
        writeln!(err, "warning: {warning}")?;
    }
    write!(out, "{}", render_table(&report))?;
    if let Some(path) = &a.out {
        std::fs::write(path, serde_json::to_string_pretty(&report)? + "\n")?;
        writeln!(out, "report -> {}", path.display())?;
    }
    Ok(0)
}

fn run_track(
    a: TrackArgs,
    out: &mut dyn std::io::Write,
    err: &mut dyn std::io::Write,
) -> CliResult {
    let videos: Vec<VideoSpec> = read_jsonl(&a.videos)?;
    let opts = TrackOptions {
        clip_len: a.clip_len,
        max_unsplit: a.max_unsplit,
        strict: a.strict,
        retries: a.retries,
    };
    let endpoint = a.endpoint.clone();
    let tracked = harness::run_tracking_batch(
        &videos,
        a.mode,
        || connect_endpoint(&endpoint),
        &opts,
        a.parallel,
    )?;
    harness::write_predictions(&a.out, &tracked)?;
    let warnings: usize = tracked.iter().map(|v| v.warnings.len()).sum();
    for video in &tracked {
        for warning in &video.warnings {
            writeln!(err, "warning: {warning}")?;
        }
    }
    writeln!(
        out,
        "tracked {} video(s), {} warning(s) -> {}",
        tracked.len(),
        warnings,
        a.out.display()
    )?;
    Ok(0)
}

fn run_check_tselector(a: CheckTselectorArgs, out: &mut dyn std::io::Write) -> CliResult {
    let params = match &a.load {
        Some(path) => tselector::load_params(File::open(path)?)?,
        None => SelectorParams::random(a.c, a.gate_hidden, a.d, a.k, !a.pure_selection, a.seed),
    };
    let c = params.input_dim();
    // independent stream for the input so it never mirrors the weights
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed ^ 0x9e37_79b9_7f4a_7c15);
    let tokens = Array2::from_shape_fn((a.n, c), |_| rng.random_range(-1.0..1.0));
    let report = gradient_check(&tokens, &params, a.epsilon)?;

    writeln!(out, "tokens:          {} x {}", a.n, c)?;
    writeln!(out, "kept (k):        {}", params.k)?;
    writeln!(out, "score weighting: {}", if params.score_weighting { "on" } else { "off" })?;
    writeln!(out, "boundary gap:    {:.6e}", report.boundary_gap)?;
    writeln!(out, "coords checked:  {}", report.coords_checked)?;
    writeln!(out, "max rel error:   {:.6e} ({})", report.max_rel_error, report.worst_coord)?;

    if let Some(path) = &a.save {
        tselector::save_params(&params, File::create(path)?)?;
        writeln!(out, "params -> {}", path.display())?;
    }
    if report.max_rel_error <= a.tolerance {
        writeln!(out, "PASS (tolerance {:e})", a.tolerance)?;
        Ok(0)
    } else {
        writeln!(out, "FAIL (tolerance {:e})", a.tolerance)?;
        Ok(1)
    }
}
