//! Dataset construction: filtering noun-chunk candidates and their tracked
//! trajectories into referring-expression tracklet records.
//!
//! A candidate flows through six stages, each of which may reject it with a
//! typed reason: the chunk filter (virtual or plural heads), the grounding
//! gate (first-frame detector confidence), the join against its trajectory,
//! the tracking gate (per-frame tracker confidence), the drift check (Kalman
//! gating along the trajectory), and the consistency check (trajectory
//! agreement with the middle and last anchor groundings). Survivors become
//! records with quantized coordinate text and a provenance block; every
//! rejection is logged with its stage and reason, so each input candidate is
//! accounted for exactly once.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{self, BoundingBox, GeometryError};
use crate::jsonl::{read_jsonl, write_jsonl, JsonlError};
use crate::kalman::{self, KalmanError};
use crate::metrics::text::stem;

/// Errors from pipeline stages and dataset construction.
#[derive(Debug, Error)]
pub enum PipelineError {
    /// A stage needed an annotation the candidate does not carry.
    #[error("missing annotation: {0}")]
    MissingAnnotation(&'static str),
    /// The trajectory has no box at an anchor's frame.
    #[error("trajectory has no box at {anchor} anchor frame {frame}")]
    MissingAnchorFrame { anchor: &'static str, frame: u64 },
    /// The trajectory has no frames at all.
    #[error("empty trajectory")]
    EmptyTrajectory,
    /// A candidate or trajectory carries malformed data.
    #[error("bad record: {0}")]
    BadRecord(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Kalman(#[from] KalmanError),
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// One token of the chunk's source caption with its part-of-speech tag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub tag: String,
}

/// A detector hit for the chunk on one anchor frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Grounding {
    pub frame: u64,
    pub bbox: BoundingBox,
    pub score: f64,
}

/// Detector hits on the three anchor frames of the chunk's video.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Groundings {
    pub first: Option<Grounding>,
    pub middle: Option<Grounding>,
    pub last: Option<Grounding>,
}

/// A noun-chunk candidate extracted from a video caption.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkCandidate {
    pub video_id: String,
    pub caption: String,
    pub chunk_text: String,
    pub head_lemma: String,
    pub tokens: Vec<Token>,
    pub groundings: Groundings,
}

/// One tracked box with the tracker's confidence.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedFrame {
    pub frame: u64,
    pub bbox: BoundingBox,
    pub score: f64,
}

/// A tracker run for one chunk across its video.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub video_id: String,
    pub chunk_text: String,
    pub frames: Vec<TrackedFrame>,
}

/// Pipeline stage identifiers, used in rejection log lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    ChunkFilter,
    GroundingGate,
    Join,
    TrackingGate,
    DriftCheck,
    ConsistencyCheck,
}

/// A logged rejection: which candidate, where, and why.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rejection {
    pub video_id: String,
    pub chunk_text: String,
    pub stage: Stage,
    pub reason: String,
}

/// Outcome of one gate for one candidate.
#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    Keep,
    Reject { stage: Stage, reason: String },
}

impl Decision {
    fn reject(stage: Stage, reason: &str) -> Self {
        Decision::Reject { stage, reason: reason.to_string() }
    }
}

/// Word lists driving the chunk filter.
#[derive(Debug, Clone)]
pub struct FilterRules {
    /// Head lemmas naming things a box cannot localize (time, love, wind...).
    pub virtual_lemmas: BTreeSet<String>,
    /// Head lemmas naming groups of things (family, people, crowd...),
    /// rejected like plurals.
    pub collective_lemmas: BTreeSet<String>,
    /// Part-of-speech tags marking a plural head.
    pub plural_tags: BTreeSet<String>,
}

const VIRTUAL_LEMMAS: &[&str] = &[
    "air", "anger", "atmosphere", "autumn", "beauty", "breath", "breeze", "cold", "darkness",
    "dawn", "day", "death", "dream", "dusk", "emotion", "energy", "evening", "fear", "feeling",
    "freedom", "fun", "happiness", "health", "heat", "history", "hope", "idea", "joy",
    "language", "life", "love", "luck", "memory", "mind", "moment", "mood", "morning", "music",
    "news", "night", "noise", "peace", "power", "question", "reason", "sadness", "season",
    "silence", "smell", "sound", "speed", "spring", "story", "summer", "thought", "time",
    "truth", "voice", "warmth", "weather", "weekend", "wind", "winter", "word", "year",
];

const COLLECTIVE_LEMMAS: &[&str] = &[
    "audience", "bunch", "couple", "crew", "crowd", "family", "flock", "folks", "gang", "group",
    "herd", "pack", "pair", "people", "staff", "swarm", "team",
];

const NUMBER_WORDS: &[(&str, u64)] = &[
    ("one", 1),
    ("two", 2),
    ("three", 3),
    ("four", 4),
    ("five", 5),
    ("six", 6),
    ("seven", 7),
    ("eight", 8),
    ("nine", 9),
    ("ten", 10),
    ("eleven", 11),
    ("twelve", 12),
    ("dozen", 12),
];

impl Default for FilterRules {
    fn default() -> Self {
        FilterRules {
            virtual_lemmas: VIRTUAL_LEMMAS.iter().map(|s| s.to_string()).collect(),
            collective_lemmas: COLLECTIVE_LEMMAS.iter().map(|s| s.to_string()).collect(),
            plural_tags: ["NNS", "NNPS"].iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl FilterRules {
    /// Extends the virtual-lemma list with one lemma per line from a file.
    /// Blank lines and `#` comments are ignored.
    pub fn load_stoplist(&mut self, path: &Path) -> Result<(), PipelineError> {
        let text = std::fs::read_to_string(path)?;
        for line in text.lines() {
            let lemma = line.split('#').next().unwrap_or("").trim().to_lowercase();
            if !lemma.is_empty() {
                self.virtual_lemmas.insert(lemma);
            }
        }
        Ok(())
    }
}

/// Numeric value of a numeral token, if it denotes one.
fn numeral_value(text: &str) -> Option<u64> {
    let lower = text.to_lowercase();
    if let Ok(v) = lower.parse::<u64>() {
        return Some(v);
    }
    NUMBER_WORDS.iter().find(|(w, _)| *w == lower).map(|(_, v)| *v)
}

/// Rejects chunks whose head names something untrackable: a virtual concept,
/// or several things at once (plural head tag, collective head, or an
/// explicit count above one).
pub fn filter_chunk(c: &ChunkCandidate, rules: &FilterRules) -> Result<Decision, PipelineError> {
    if c.head_lemma.trim().is_empty() {
        return Err(PipelineError::MissingAnnotation("head_lemma"));
    }
    if c.tokens.is_empty() {
        return Err(PipelineError::MissingAnnotation("tokens"));
    }
    let head = c.head_lemma.to_lowercase();
    if rules.virtual_lemmas.contains(&head) {
        return Ok(Decision::reject(Stage::ChunkFilter, "virtual"));
    }
    if rules.collective_lemmas.contains(&head) {
        return Ok(Decision::reject(Stage::ChunkFilter, "plural"));
    }
    // the head token: surface or stemmed match on the lemma, else the last
    // noun-tagged token
    let head_token = c
        .tokens
        .iter()
        .find(|t| {
            let lower = t.text.to_lowercase();
            lower == head || stem(&lower) == head
        })
        .or_else(|| c.tokens.iter().rev().find(|t| t.tag.starts_with("NN")));
    if let Some(token) = head_token {
        if rules.plural_tags.contains(&token.tag) {
            return Ok(Decision::reject(Stage::ChunkFilter, "plural"));
        }
    }
    if c.tokens
        .iter()
        .filter(|t| t.tag == "CD")
        .filter_map(|t| numeral_value(&t.text))
        .any(|v| v > 1)
    {
        return Ok(Decision::reject(Stage::ChunkFilter, "plural"));
    }
    Ok(Decision::Keep)
}

/// Requires the first-frame grounding to exceed the confidence threshold.
pub fn gate_grounding(c: &ChunkCandidate, tau_g: f64) -> Result<Decision, PipelineError> {
    let first = c
        .groundings
        .first
        .as_ref()
        .ok_or(PipelineError::MissingAnnotation("groundings.first"))?;
    if first.score > tau_g {
        Ok(Decision::Keep)
    } else {
        Ok(Decision::reject(Stage::GroundingGate, "low_grounding_score"))
    }
}

/// Requires every tracked frame to exceed the confidence threshold.
pub fn gate_tracking(t: &Trajectory, tau_t: f64) -> Result<Decision, PipelineError> {
    if t.frames.is_empty() {
        return Err(PipelineError::EmptyTrajectory);
    }
    if t.frames.iter().all(|f| f.score > tau_t) {
        Ok(Decision::Keep)
    } else {
        Ok(Decision::reject(Stage::TrackingGate, "low_tracking_score"))
    }
}

/// Result of the anchor consistency check, keeping the measured overlaps for
/// record provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyOutcome {
    pub decision: Decision,
    pub iou_mid: f64,
    pub iou_last: f64,
}

/// Checks the trajectory against the middle and last anchor groundings:
/// both overlaps must be at least `tau_iou`.
pub fn consistency_check(
    t: &Trajectory,
    c: &ChunkCandidate,
    tau_iou: f64,
) -> Result<ConsistencyOutcome, PipelineError> {
    let middle = c
        .groundings
        .middle
        .as_ref()
        .ok_or(PipelineError::MissingAnnotation("groundings.middle"))?;
    let last = c
        .groundings
        .last
        .as_ref()
        .ok_or(PipelineError::MissingAnnotation("groundings.last"))?;
    let box_at = |anchor: &'static str, frame: u64| -> Result<BoundingBox, PipelineError> {
        t.frames
            .iter()
            .find(|f| f.frame == frame)
            .map(|f| f.bbox)
            .ok_or(PipelineError::MissingAnchorFrame { anchor, frame })
    };
    let iou_mid = geometry::iou(&box_at("middle", middle.frame)?, &middle.bbox);
    let iou_last = geometry::iou(&box_at("last", last.frame)?, &last.bbox);
    let decision = if iou_mid >= tau_iou && iou_last >= tau_iou {
        Decision::Keep
    } else {
        Decision::reject(Stage::ConsistencyCheck, "low_anchor_iou")
    };
    Ok(ConsistencyOutcome { decision, iou_mid, iou_last })
}

/// Gate thresholds for the whole pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    /// Minimum first-frame grounding confidence (exclusive).
    pub tau_g: f64,
    /// Minimum per-frame tracking confidence (exclusive).
    pub tau_t: f64,
    /// Minimum anchor overlap (inclusive).
    pub tau_iou: f64,
    /// Kalman gating threshold for the drift check.
    pub gate: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { tau_g: 0.6, tau_t: 0.8, tau_iou: 0.3, gate: kalman::DEFAULT_GATE_THRESHOLD }
    }
}

/// One frame of an emitted record, with the box in coordinate text form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordFrame {
    pub frame: u64,
    #[serde(rename = "box")]
    pub bbox: String,
}

/// Audit trail of the measurements that admitted a record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub grounding_score: f64,
    pub min_track_score: f64,
    pub iou_mid: f64,
    pub iou_last: f64,
    pub drifted: bool,
}

/// A dataset record: an expression and its quantized trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackletRecord {
    pub video_id: String,
    pub expression: String,
    pub trajectory: Vec<RecordFrame>,
    pub provenance: Provenance,
}

/// Everything a pipeline run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    /// Surviving records, sorted by video id then expression.
    pub records: Vec<TrackletRecord>,
    /// One line per rejected candidate, plus join-stage lines for duplicate
    /// and orphan trajectories.
    pub rejections: Vec<Rejection>,
    pub stats: PipelineStats,
}

/// Summary counts of a pipeline run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PipelineStats {
    pub candidates: usize,
    pub records: usize,
    pub rejected_by_stage: BTreeMap<Stage, usize>,
    pub orphan_trajectories: usize,
    pub duplicate_trajectories: usize,
}

/// Runs every candidate through the filter chain against its trajectory.
///
/// Candidates are processed in `(video_id, chunk_text)` order, so records and
/// the rejection log are deterministic for a given input regardless of file
/// order. With `strict` set, malformed candidates (missing annotations,
/// degenerate geometry) abort the run; otherwise they are logged as typed
/// rejections at the stage that needed the data.
pub fn build_records(
    chunks: &[ChunkCandidate],
    trajectories: &[Trajectory],
    rules: &FilterRules,
    thresholds: &Thresholds,
    strict: bool,
) -> Result<PipelineOutput, PipelineError> {
    let mut traj_index: BTreeMap<(&str, &str), &Trajectory> = BTreeMap::new();
    let mut traj_used: BTreeMap<(&str, &str), bool> = BTreeMap::new();
    let mut side_rejections: Vec<Rejection> = Vec::new();
    let mut stats = PipelineStats { candidates: chunks.len(), ..Default::default() };

    for t in trajectories {
        let key = (t.video_id.as_str(), t.chunk_text.as_str());
        if traj_index.contains_key(&key) {
            let msg = format!(
                "duplicate trajectory for video {:?} chunk {:?}",
                t.video_id, t.chunk_text
            );
            if strict {
                return Err(PipelineError::BadRecord(msg));
            }
            stats.duplicate_trajectories += 1;
            side_rejections.push(Rejection {
                video_id: t.video_id.clone(),
                chunk_text: t.chunk_text.clone(),
                stage: Stage::Join,
                reason: "duplicate_trajectory".to_string(),
            });
            continue;
        }
        traj_index.insert(key, t);
        traj_used.insert(key, false);
    }

    let mut order: Vec<usize> = (0..chunks.len()).collect();
    order.sort_by(|&a, &b| {
        (chunks[a].video_id.as_str(), chunks[a].chunk_text.as_str(), a)
            .cmp(&(chunks[b].video_id.as_str(), chunks[b].chunk_text.as_str(), b))
    });

    let mut records = Vec::new();
    let mut rejections = Vec::new();
    let reject = |stats: &mut PipelineStats,
                      rejections: &mut Vec<Rejection>,
                      c: &ChunkCandidate,
                      stage: Stage,
                      reason: String| {
        *stats.rejected_by_stage.entry(stage).or_insert(0) += 1;
        rejections.push(Rejection {
            video_id: c.video_id.clone(),
            chunk_text: c.chunk_text.clone(),
            stage,
            reason,
        });
    };

    for idx in order {
        let c = &chunks[idx];
        // Each closure call runs one stage; errors become typed rejections
        // unless strict.
        macro_rules! stage_result {
            ($stage:expr, $expr:expr) => {
                match $expr {
                    Ok(v) => v,
                    Err(e) => {
                        if strict {
                            return Err(e);
                        }
                        reject(&mut stats, &mut rejections, c, $stage, stage_error_reason(&e));
                        continue;
                    }
                }
            };
        }
        macro_rules! gate {
            ($expr:expr) => {
                if let Decision::Reject { stage, reason } = $expr {
                    reject(&mut stats, &mut rejections, c, stage, reason);
                    continue;
                }
            };
        }

        gate!(stage_result!(Stage::ChunkFilter, filter_chunk(c, rules)));
        gate!(stage_result!(Stage::GroundingGate, gate_grounding(c, thresholds.tau_g)));

        let key = (c.video_id.as_str(), c.chunk_text.as_str());
        let trajectory = match traj_index.get(&key) {
            Some(t) => {
                traj_used.insert(key, true);
                *t
            }
            None => {
                reject(
                    &mut stats,
                    &mut rejections,
                    c,
                    Stage::Join,
                    "missing_trajectory".to_string(),
                );
                continue;
            }
        };

        gate!(stage_result!(Stage::TrackingGate, gate_tracking(trajectory, thresholds.tau_t)));

        let track: Vec<(u64, BoundingBox)> =
            trajectory.frames.iter().map(|f| (f.frame, f.bbox)).collect();
        let drift = stage_result!(
            Stage::DriftCheck,
            kalman::drift_check(&track, thresholds.gate).map_err(PipelineError::from)
        );
        if drift.drifted {
            reject(&mut stats, &mut rejections, c, Stage::DriftCheck, "drift".to_string());
            continue;
        }

        let outcome = stage_result!(
            Stage::ConsistencyCheck,
            consistency_check(trajectory, c, thresholds.tau_iou)
        );
        gate!(outcome.decision);

        let first = c
            .groundings
            .first
            .as_ref()
            .expect("first grounding checked by the grounding gate");
        let min_track_score = trajectory
            .frames
            .iter()
            .map(|f| f.score)
            .fold(f64::INFINITY, f64::min);
        records.push(TrackletRecord {
            video_id: c.video_id.clone(),
            expression: c.chunk_text.clone(),
            trajectory: trajectory
                .frames
                .iter()
                .map(|f| RecordFrame { frame: f.frame, bbox: f.bbox.quantize().to_string() })
                .collect(),
            provenance: Provenance {
                grounding_score: first.score,
                min_track_score,
                iou_mid: outcome.iou_mid,
                iou_last: outcome.iou_last,
                drifted: drift.drifted,
            },
        });
    }

    for (key, used) in &traj_used {
        if !used {
            stats.orphan_trajectories += 1;
            side_rejections.push(Rejection {
                video_id: key.0.to_string(),
                chunk_text: key.1.to_string(),
                stage: Stage::Join,
                reason: "orphan_trajectory".to_string(),
            });
        }
    }
    side_rejections.sort_by(|a, b| {
        (&a.video_id, &a.chunk_text, &a.reason).cmp(&(&b.video_id, &b.chunk_text, &b.reason))
    });
    rejections.extend(side_rejections);

    stats.records = records.len();
    Ok(PipelineOutput { records, rejections, stats })
}

/// Maps a stage error to its rejection-log reason code.
fn stage_error_reason(e: &PipelineError) -> String {
    match e {
        PipelineError::MissingAnnotation(what) => format!("missing_annotation:{what}"),
        PipelineError::MissingAnchorFrame { anchor, .. } => {
            format!("missing_anchor_frame:{anchor}")
        }
        PipelineError::EmptyTrajectory => "empty_trajectory".to_string(),
        PipelineError::Kalman(KalmanError::TooShort(_)) => "trajectory_too_short".to_string(),
        PipelineError::Kalman(KalmanError::DegenerateBox) => "degenerate_box".to_string(),
        other => format!("error:{other}"),
    }
}

// ---------------------------------------------------------------------------
// File-level entry point
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
struct RawChunk {
    video_id: String,
    caption: String,
    chunk_text: String,
    head_lemma: String,
    #[serde(default)]
    tokens: Vec<Token>,
    #[serde(default)]
    groundings: RawGroundings,
}

#[derive(Debug, Default, Deserialize)]
struct RawGroundings {
    first: Option<RawGrounding>,
    middle: Option<RawGrounding>,
    last: Option<RawGrounding>,
}

#[derive(Debug, Deserialize)]
struct RawGrounding {
    frame: u64,
    #[serde(rename = "box")]
    bbox: [f64; 4],
    score: f64,
}

#[derive(Debug, Deserialize)]
struct RawTrajectory {
    video_id: String,
    chunk_text: String,
    frames: Vec<RawTrackedFrame>,
}

#[derive(Debug, Deserialize)]
struct RawTrackedFrame {
    frame: u64,
    #[serde(rename = "box")]
    bbox: [f64; 4],
    score: f64,
}

fn convert_grounding(
    raw: Option<RawGrounding>,
    context: &str,
    anchor: &str,
) -> Result<Option<Grounding>, PipelineError> {
    raw.map(|g| {
        if !g.score.is_finite() {
            return Err(PipelineError::BadRecord(format!(
                "{context}: non-finite {anchor} grounding score"
            )));
        }
        let bbox = BoundingBox::from_array(g.bbox)
            .map_err(|e| PipelineError::BadRecord(format!("{context}: {anchor} grounding {e}")))?;
        Ok(Grounding { frame: g.frame, bbox, score: g.score })
    })
    .transpose()
}

/// Reads chunk candidates from a JSONL file, validating geometry.
pub fn read_chunks(path: &Path) -> Result<Vec<ChunkCandidate>, PipelineError> {
    let raw: Vec<RawChunk> = read_jsonl(path)?;
    raw.into_iter()
        .map(|r| {
            let context = format!("chunk {:?}/{:?}", r.video_id, r.chunk_text);
            Ok(ChunkCandidate {
                groundings: Groundings {
                    first: convert_grounding(r.groundings.first, &context, "first")?,
                    middle: convert_grounding(r.groundings.middle, &context, "middle")?,
                    last: convert_grounding(r.groundings.last, &context, "last")?,
                },
                video_id: r.video_id,
                caption: r.caption,
                chunk_text: r.chunk_text,
                head_lemma: r.head_lemma,
                tokens: r.tokens,
            })
        })
        .collect()
}

/// Reads trajectories from a JSONL file, validating geometry and frame order.
pub fn read_trajectories(path: &Path) -> Result<Vec<Trajectory>, PipelineError> {
    let raw: Vec<RawTrajectory> = read_jsonl(path)?;
    raw.into_iter()
        .map(|r| {
            let context = format!("trajectory {:?}/{:?}", r.video_id, r.chunk_text);
            let frames = r
                .frames
                .iter()
                .map(|f| {
                    if !f.score.is_finite() {
                        return Err(PipelineError::BadRecord(format!(
                            "{context}: non-finite score at frame {}",
                            f.frame
                        )));
                    }
                    let bbox = BoundingBox::from_array(f.bbox).map_err(|e| {
                        PipelineError::BadRecord(format!("{context}: frame {}: {e}", f.frame))
                    })?;
                    Ok(TrackedFrame { frame: f.frame, bbox, score: f.score })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if !frames.windows(2).all(|w| w[0].frame < w[1].frame) {
                return Err(PipelineError::BadRecord(format!(
                    "{context}: frames not strictly increasing"
                )));
            }
            Ok(Trajectory { video_id: r.video_id, chunk_text: r.chunk_text, frames })
        })
        .collect()
}

/// Configuration of a file-level dataset build.
#[derive(Debug, Clone)]
pub struct BuildConfig {
    pub thresholds: Thresholds,
    pub strict: bool,
    /// Extra virtual-lemma stoplist file, one lemma per line.
    pub stoplist: Option<PathBuf>,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig { thresholds: Thresholds::default(), strict: false, stoplist: None }
    }
}

/// File-level pipeline: reads chunks and trajectories, writes the record and
/// rejection JSONL files plus a `<out>.meta.json` sidecar describing the run.
pub fn run_build_dataset(
    chunks_path: &Path,
    tracks_path: &Path,
    out_path: &Path,
    reject_path: &Path,
    config: &BuildConfig,
) -> Result<PipelineStats, PipelineError> {
    let mut rules = FilterRules::default();
    if let Some(stoplist) = &config.stoplist {
        rules.load_stoplist(stoplist)?;
    }
    let chunks = read_chunks(chunks_path)?;
    let trajectories = read_trajectories(tracks_path)?;
    let output = build_records(&chunks, &trajectories, &rules, &config.thresholds, config.strict)?;

    write_jsonl(out_path, &output.records)?;
    write_jsonl(reject_path, &output.rejections)?;

    let meta = serde_json::json!({
        "tool": "trackkit",
        "version": env!("CARGO_PKG_VERSION"),
        "command": "build-dataset",
        "config": {
            "chunks": chunks_path.display().to_string(),
            "tracks": tracks_path.display().to_string(),
            "thresholds": config.thresholds,
            "strict": config.strict,
            "stoplist": config.stoplist.as_ref().map(|p| p.display().to_string()),
        },
        "stats": output.stats,
    });
    let meta_path = out_path.with_extension("meta.json");
    std::fs::write(&meta_path, serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(output.stats)
}

impl From<serde_json::Error> for PipelineError {
    fn from(e: serde_json::Error) -> Self {
        PipelineError::BadRecord(format!("json: {e}"))
    }
}
