//! Clip-based tracking orchestration: scheduling, frame sampling, and the
//! line-delimited JSON protocol that drives an external predictor.
//!
//! Long videos are tracked clip by clip: each clip shares one overlap frame
//! with its predecessor, and the box predicted on that frame initializes the
//! next clip, so the target hands off across the whole video. The predictor
//! is any process speaking the wire protocol — one JSON request per line in,
//! one JSON response per line out — reachable over TCP or as a child process
//! on stdio.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{parse_coords, QuantBox};
use crate::jsonl::JsonlError;

/// Frames per tracking request.
pub const DEFAULT_CLIP_LEN: u64 = 8;
/// Longest video tracked in a single request.
pub const DEFAULT_MAX_UNSPLIT: u64 = 32;
/// Frames drawn by [`uniform_sample`] by default.
pub const DEFAULT_UNIFORM_SAMPLES: usize = 16;

/// Errors from scheduling, sampling, and predictor communication.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("empty video: frame count must be positive")]
    EmptyVideo,
    #[error("video too short: {0} frame(s), need at least 2")]
    TooShort(u64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("connect to {addr}: {source}")]
    Connect {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("predictor closed the stream")]
    Closed,
    #[error("malformed response: {0}")]
    BadResponse(String),
    #[error("request {id} failed after {attempts} attempt(s): {last_error}")]
    RequestFailed { id: String, attempts: u32, last_error: String },
    #[error("strict mode: {0}")]
    Strict(String),
    #[error("bad record: {0}")]
    BadRecord(String),
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Splits a video into tracking clips with the default clip length and
/// unsplit limit.
pub fn schedule_clips(frame_count: u64) -> Result<Vec<(u64, u64)>, HarnessError> {
    schedule_clips_with(frame_count, DEFAULT_CLIP_LEN, DEFAULT_MAX_UNSPLIT)
}

/// Splits `frame_count` frames into half-open clips `[start, end)`.
///
/// Videos of at most `max_unsplit` frames become a single clip. Longer ones
/// are cut into `clip_len`-frame clips, each starting on the last frame of
/// its predecessor, so consecutive clips overlap by exactly one frame. The
/// clips cover every frame; only the final clip may be shorter, and it is
/// never shorter than two frames (a one-frame tail would sit inside the
/// previous clip's overlap, so the loop never produces one).
pub fn schedule_clips_with(
    frame_count: u64,
    clip_len: u64,
    max_unsplit: u64,
) -> Result<Vec<(u64, u64)>, HarnessError> {
    if frame_count < 2 {
        return Err(HarnessError::TooShort(frame_count));
    }
    if clip_len < 2 {
        return Err(HarnessError::InvalidParams(format!(
            "clip length {clip_len} cannot advance past its one-frame overlap"
        )));
    }
    if frame_count <= max_unsplit {
        return Ok(vec![(0, frame_count)]);
    }
    let mut clips = Vec::new();
    let mut start = 0;
    loop {
        let end = (start + clip_len).min(frame_count);
        clips.push((start, end));
        if end == frame_count {
            return Ok(clips);
        }
        start = end - 1;
    }
}

/// Evenly samples up to `n` frame indices: the centers of `n` equal bins,
/// deduplicated. Videos shorter than `n` frames yield every frame.
pub fn uniform_sample(frame_count: u64, n: usize) -> Result<Vec<u64>, HarnessError> {
    if frame_count == 0 {
        return Err(HarnessError::EmptyVideo);
    }
    if n == 0 {
        return Err(HarnessError::InvalidParams("sample count must be positive".into()));
    }
    let mut indices: Vec<u64> = (0..n)
        .map(|i| ((i as f64 + 0.5) * frame_count as f64 / n as f64).floor() as u64)
        .collect();
    indices.dedup();
    Ok(indices)
}

/// Draws a training frame set: a frame count `c` in 2..=8 and an interval
/// `v` in 1..=60, then a uniformly random start.
///
/// Infeasible draws degrade gracefully: `c` is capped by the video length
/// and `v` by the largest interval that still fits, so a two-frame video
/// always yields `[0, 1]`. The draw order (count, interval, start) is fixed,
/// making sequences reproducible from the generator state.
pub fn training_sample(frame_count: u64, rng: &mut impl Rng) -> Result<Vec<u64>, HarnessError> {
    if frame_count < 2 {
        return Err(HarnessError::TooShort(frame_count));
    }
    let mut c: u64 = rng.random_range(2..=8);
    let mut v: u64 = rng.random_range(1..=60);
    c = c.min(frame_count);
    let v_max = (frame_count - 1) / (c - 1);
    v = v.min(v_max);
    let s_max = frame_count - 1 - (c - 1) * v;
    let s = rng.random_range(0..=s_max);
    Ok((0..c).map(|i| s + i * v).collect())
}

// ---------------------------------------------------------------------------
// Wire protocol
// ---------------------------------------------------------------------------

/// How the predictor is told what to track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackMode {
    /// `init` is a quantized box on the clip's first frame.
    Box,
    /// `init` is a referring expression.
    Expr,
}

/// One tracking request: predict a box for every listed frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRequest {
    /// Caller-chosen identifier echoed back in the response.
    pub id: String,
    pub video_id: String,
    /// Opaque frame references (paths or indices), in clip order. The
    /// toolkit never opens them; the predictor owns pixel access.
    pub frames: Vec<String>,
    pub mode: TrackMode,
    /// Box text or expression, depending on `mode`.
    pub init: String,
    /// Instruction the predictor should follow, fully rendered.
    pub prompt_template: String,
}

/// One tracking response: free-form text per requested frame, each expected
/// to contain a coordinate tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackResponse {
    pub id: String,
    pub per_frame: Vec<String>,
}

/// A connection to a predictor speaking the line protocol.
pub trait TrackClient {
    fn track(&mut self, request: &TrackRequest) -> Result<TrackResponse, HarnessError>;
}

fn exchange_line<W: Write, R: BufRead>(
    writer: &mut W,
    reader: &mut R,
    request: &TrackRequest,
) -> Result<TrackResponse, HarnessError> {
    let mut line = serde_json::to_string(request)?;
    line.push('\n');
    writer.write_all(line.as_bytes())?;
    writer.flush()?;
    let mut response = String::new();
    if reader.read_line(&mut response)? == 0 {
        return Err(HarnessError::Closed);
    }
    let parsed: TrackResponse = serde_json::from_str(response.trim_end())
        .map_err(|e| HarnessError::BadResponse(format!("{e}; line was {response:?}")))?;
    Ok(parsed)
}

/// Predictor client over a TCP connection.
pub struct TcpLineClient {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl TcpLineClient {
    pub fn connect(addr: &str) -> Result<Self, HarnessError> {
        let stream = TcpStream::connect(addr)
            .map_err(|source| HarnessError::Connect { addr: addr.to_string(), source })?;
        let writer = stream
            .try_clone()
            .map_err(|source| HarnessError::Connect { addr: addr.to_string(), source })?;
        Ok(TcpLineClient { reader: BufReader::new(stream), writer })
    }
}

impl TrackClient for TcpLineClient {
    fn track(&mut self, request: &TrackRequest) -> Result<TrackResponse, HarnessError> {
        exchange_line(&mut self.writer, &mut self.reader, request)
    }
}

/// Predictor client over a child process's stdin/stdout.
pub struct ExecLineClient {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl ExecLineClient {
    /// Spawns `program` with `args`; the child must answer one JSON line per
    /// request line on stdout.
    pub fn spawn(program: &str, args: &[String]) -> Result<Self, HarnessError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|source| HarnessError::Connect { addr: program.to_string(), source })?;
        let stdin = child.stdin.take().expect("stdin piped");
        let stdout = BufReader::new(child.stdout.take().expect("stdout piped"));
        Ok(ExecLineClient { child, stdin, stdout })
    }
}

impl TrackClient for ExecLineClient {
    fn track(&mut self, request: &TrackRequest) -> Result<TrackResponse, HarnessError> {
        exchange_line(&mut self.stdin, &mut self.stdout, request)
    }
}

impl Drop for ExecLineClient {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Opens a client for an endpoint string: `exec:PROGRAM [ARGS...]` spawns a
/// child process (whitespace-split), anything else is a TCP address.
pub fn connect_endpoint(endpoint: &str) -> Result<Box<dyn TrackClient + Send>, HarnessError> {
    if let Some(cmdline) = endpoint.strip_prefix("exec:") {
        let mut parts = cmdline.split_whitespace();
        let program = parts
            .next()
            .ok_or_else(|| HarnessError::InvalidParams("empty exec endpoint".into()))?;
        let args: Vec<String> = parts.map(str::to_string).collect();
        Ok(Box::new(ExecLineClient::spawn(program, &args)?))
    } else {
        Ok(Box::new(TcpLineClient::connect(endpoint)?))
    }
}

// ---------------------------------------------------------------------------
// Clip-based tracking runs
// ---------------------------------------------------------------------------

/// What initializes tracking on the first clip.
#[derive(Debug, Clone, PartialEq)]
pub enum TrackInit {
    /// First-frame box (single-object tracking).
    Box(QuantBox),
    /// Referring expression (referring tracking).
    Expression(String),
}

/// Knobs for a tracking run.
#[derive(Debug, Clone)]
pub struct TrackOptions {
    pub clip_len: u64,
    pub max_unsplit: u64,
    /// Abort on unparseable predictions instead of carrying the last box.
    pub strict: bool,
    /// Re-sends per failed request before giving up.
    pub retries: u32,
}

impl Default for TrackOptions {
    fn default() -> Self {
        TrackOptions {
            clip_len: DEFAULT_CLIP_LEN,
            max_unsplit: DEFAULT_MAX_UNSPLIT,
            strict: false,
            retries: 2,
        }
    }
}

/// A completed tracking run: exactly one box per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedVideo {
    pub video_id: String,
    pub frames: Vec<(u64, QuantBox)>,
    pub warnings: Vec<String>,
}

/// One line of the videos input file: what to track and where its frames
/// live. Frame references are opaque to the toolkit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VideoSpec {
    pub video_id: String,
    pub frame_count: u64,
    /// Per-frame references (e.g. image paths) forwarded verbatim to the
    /// predictor; frame indices stand in when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames: Option<Vec<String>>,
    /// First-frame box text, required in single-object mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_box: Option<String>,
    /// Referring expression, required in referring mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expression: Option<String>,
}

impl VideoSpec {
    /// Meta with index-derived frame references and no init payloads.
    pub fn new(video_id: &str, frame_count: u64) -> Self {
        VideoSpec {
            video_id: video_id.to_string(),
            frame_count,
            frames: None,
            init_box: None,
            expression: None,
        }
    }

    fn frame_ref(&self, frame: u64) -> String {
        match &self.frames {
            Some(refs) => refs[frame as usize].clone(),
            None => frame.to_string(),
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if let Some(refs) = &self.frames {
            if refs.len() as u64 != self.frame_count {
                return Err(HarnessError::BadRecord(format!(
                    "video {:?}: {} frame refs for {} frames",
                    self.video_id,
                    refs.len(),
                    self.frame_count
                )));
            }
        }
        Ok(())
    }
}

/// The expression rides along in every clip's prompt — each clip is an
/// independent model call — while `init` carries the positional handoff.
fn prompt_for(mode: TrackMode, init: &str, expression: Option<&str>, frame_count: usize) -> String {
    match (mode, expression) {
        (TrackMode::Expr, _) => format!(
            "Track the object described by \"{init}\" across {frame_count} frames; \
             answer one [x1,y1,x2,y2] per frame."
        ),
        (TrackMode::Box, Some(expr)) => format!(
            "Track the object described by \"{expr}\", last seen at {init}, across \
             {frame_count} frames; answer one [x1,y1,x2,y2] per frame."
        ),
        (TrackMode::Box, None) => format!(
            "Track the target initialized at {init} across {frame_count} frames; \
             answer one [x1,y1,x2,y2] per frame."
        ),
    }
}

fn send_with_retries(
    client: &mut dyn TrackClient,
    request: &TrackRequest,
    retries: u32,
) -> Result<TrackResponse, HarnessError> {
    let attempts = retries + 1;
    let mut last_error = String::new();
    for _ in 0..attempts {
        match client.track(request) {
            Ok(response) => {
                if response.id != request.id {
                    last_error = format!(
                        "response id {:?} does not match request id {:?}",
                        response.id, request.id
                    );
                    continue;
                }
                if response.per_frame.len() != request.frames.len() {
                    last_error = format!(
                        "response carries {} frames, request asked for {}",
                        response.per_frame.len(),
                        request.frames.len()
                    );
                    continue;
                }
                return Ok(response);
            }
            Err(e) => last_error = e.to_string(),
        }
    }
    Err(HarnessError::RequestFailed { id: request.id.clone(), attempts, last_error })
}

/// Tracks one video clip by clip through a predictor.
///
/// The first clip is initialized from `init`; every later clip runs in box
/// mode, initialized with the box predicted on its overlap frame, whose
/// stored value the later clip then overwrites. Expression runs keep the
/// expression in every clip's prompt. Frames whose response text contains no
/// valid tuple fall back to the most recent box (the initialization box for
/// single-object tracking, the full frame if an expression-initialized run
/// fails on its very first frame) with a warning, or abort under `strict`.
pub fn run_tracking(
    meta: &VideoSpec,
    init: &TrackInit,
    client: &mut dyn TrackClient,
    opts: &TrackOptions,
) -> Result<TrackedVideo, HarnessError> {
    meta.validate()?;
    let video_id = meta.video_id.as_str();
    let schedule = schedule_clips_with(meta.frame_count, opts.clip_len, opts.max_unsplit)?;
    let mut boxes: Vec<Option<QuantBox>> = vec![None; meta.frame_count as usize];
    let (mut carry, expression): (Option<QuantBox>, Option<&str>) = match init {
        TrackInit::Box(q) => (Some(*q), None),
        TrackInit::Expression(e) => (None, Some(e.as_str())),
    };
    let mut warnings = Vec::new();

    for (clip_index, &(start, end)) in schedule.iter().enumerate() {
        let frames: Vec<u64> = (start..end).collect();
        let (mode, init_text) = if clip_index == 0 {
            match init {
                TrackInit::Box(q) => (TrackMode::Box, q.to_string()),
                TrackInit::Expression(e) => (TrackMode::Expr, e.clone()),
            }
        } else {
            let handoff = boxes[start as usize]
                .or(carry)
                .expect("overlap frame was assigned by the previous clip");
            (TrackMode::Box, handoff.to_string())
        };
        let request = TrackRequest {
            id: format!("{video_id}#{clip_index}"),
            video_id: video_id.to_string(),
            frames: frames.iter().map(|f| meta.frame_ref(*f)).collect(),
            mode,
            init: init_text.clone(),
            prompt_template: prompt_for(mode, &init_text, expression, frames.len()),
        };
        let response = send_with_retries(client, &request, opts.retries)?;

        for (frame, text) in frames.iter().zip(&response.per_frame) {
            let parsed = parse_coords(text);
            let chosen = match parsed.first() {
                Some(q) => {
                    if parsed.len() > 1 {
                        warnings.push(format!(
                            "{video_id} frame {frame}: {} tuples in response, taking the first",
                            parsed.len()
                        ));
                    }
                    *q
                }
                None => {
                    if opts.strict {
                        return Err(HarnessError::Strict(format!(
                            "{video_id} frame {frame}: no coordinate tuple in {text:?}"
                        )));
                    }
                    let fallback = carry.unwrap_or_else(|| {
                        QuantBox::new(0, 0, 99, 99).expect("full frame is in range")
                    });
                    warnings.push(format!(
                        "{video_id} frame {frame}: no coordinate tuple in response, \
                         carrying {fallback}"
                    ));
                    fallback
                }
            };
            boxes[*frame as usize] = Some(chosen);
            carry = Some(chosen);
        }
    }

    let frames = boxes
        .into_iter()
        .enumerate()
        .map(|(i, b)| (i as u64, b.expect("schedule covers every frame")))
        .collect();
    Ok(TrackedVideo { video_id: video_id.to_string(), frames, warnings })
}

// ---------------------------------------------------------------------------
// Batch runs over a videos file
// ---------------------------------------------------------------------------

/// Batch task flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TrackTask {
    Sot,
    Rsot,
}

fn init_for(spec: &VideoSpec, task: TrackTask) -> Result<TrackInit, HarnessError> {
    match task {
        TrackTask::Sot => {
            let text = spec.init_box.as_ref().ok_or_else(|| {
                HarnessError::BadRecord(format!("video {:?} has no init_box", spec.video_id))
            })?;
            let tuples = parse_coords(text);
            if tuples.len() != 1 {
                return Err(HarnessError::BadRecord(format!(
                    "video {:?}: init_box {text:?} must contain exactly one tuple",
                    spec.video_id
                )));
            }
            Ok(TrackInit::Box(tuples[0]))
        }
        TrackTask::Rsot => {
            let expr = spec.expression.as_ref().ok_or_else(|| {
                HarnessError::BadRecord(format!("video {:?} has no expression", spec.video_id))
            })?;
            Ok(TrackInit::Expression(expr.clone()))
        }
    }
}

/// Tracks every video in `videos`, distributing them over `parallel`
/// workers; each worker opens its own client via `make_client`. Results come
/// back in input order regardless of scheduling.
pub fn run_tracking_batch<F>(
    videos: &[VideoSpec],
    task: TrackTask,
    make_client: F,
    opts: &TrackOptions,
    parallel: usize,
) -> Result<Vec<TrackedVideo>, HarnessError>
where
    F: Fn() -> Result<Box<dyn TrackClient + Send>, HarnessError> + Sync,
{
    if parallel == 0 {
        return Err(HarnessError::InvalidParams("parallel must be positive".into()));
    }
    let results: Vec<Mutex<Option<Result<TrackedVideo, HarnessError>>>> =
        videos.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = parallel.min(videos.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| {
                let mut client = match make_client() {
                    Ok(c) => c,
                    Err(e) => {
                        // park the connection error on the next unclaimed video
                        let idx = next.fetch_add(1, Ordering::SeqCst);
                        if idx < videos.len() {
                            *results[idx].lock().unwrap() = Some(Err(e));
                        }
                        return;
                    }
                };
                loop {
                    let idx = next.fetch_add(1, Ordering::SeqCst);
                    if idx >= videos.len() {
                        return;
                    }
                    let spec = &videos[idx];
                    let outcome = init_for(spec, task)
                        .and_then(|init| run_tracking(spec, &init, client.as_mut(), opts));
                    *results[idx].lock().unwrap() = Some(outcome);
                }
            });
        }
    });

    let mut collected = Vec::with_capacity(videos.len());
    for (i, slot) in results.into_iter().enumerate() {
        match slot.into_inner().unwrap() {
            Some(Ok(v)) => collected.push(v),
            Some(Err(e)) => return Err(e),
            None => {
                return Err(HarnessError::RequestFailed {
                    id: videos[i].video_id.clone(),
                    attempts: 0,
                    last_error: "worker never processed this video".into(),
                })
            }
        }
    }
    Ok(collected)
}

/// One line of the predictions output file.
#[derive(Debug, Clone, Serialize)]
pub struct PredictionLine {
    pub video_id: String,
    pub trajectory: Vec<PredictionFrame>,
}

/// One `(frame, box-text)` entry of a prediction line.
#[derive(Debug, Clone, Serialize)]
pub struct PredictionFrame {
    pub frame: u64,
    #[serde(rename = "box")]
    pub bbox: String,
}

/// Writes tracked videos as a predictions JSONL file compatible with the
/// evaluation input schema.
pub fn write_predictions(path: &Path, videos: &[TrackedVideo]) -> Result<(), HarnessError> {
    let lines = videos.iter().map(|v| PredictionLine {
        video_id: v.video_id.clone(),
        trajectory: v
            .frames
            .iter()
            .map(|(frame, q)| PredictionFrame { frame: *frame, bbox: q.to_string() })
            .collect(),
    });
    crate::jsonl::write_jsonl(path, lines)?;
    Ok(())
}
