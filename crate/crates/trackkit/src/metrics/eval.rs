//! Run-level evaluation: reads ground-truth and prediction JSONL files,
//! scores them per video, and aggregates into a serializable report.
//!
//! Tracking files hold one video per line: `{"video_id", "trajectory":
//! [{"frame", "box"}, ...]}` with boxes in the quantized `[a,b,c,d]` text
//! form (optional `width`/`height` override the frame size used for pixel
//! errors). Captioning files hold one caption per line: `{"video_id",
//! "frame", "text"}`; several ground-truth lines with the same video and
//! frame form a reference set.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::text::{cider_scores, meteor_lite};
use super::{
    norm_precision_from_errors, precision_curve_from_errors, success_curve_from_ious,
    MetricsError, NORM_PRECISION_THRESHOLD, PRECISION_PIXELS,
};
use crate::geometry::{self, parse_coords, BoundingBox};
use crate::jsonl::read_jsonl;

/// Which benchmark protocol to score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// Single-object tracking from a first-frame box; the initialization
    /// frame is excluded from scoring.
    Sot,
    /// Referring single-object tracking from an expression; every frame
    /// counts, including the first.
    Rsot,
    /// Region-grounded caption generation, scored with text metrics.
    Reg,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Sot => "sot",
            Task::Rsot => "rsot",
            Task::Reg => "reg",
        })
    }
}

/// Evaluation behavior switches.
#[derive(Debug, Clone)]
pub struct EvalOptions {
    /// Fail on any missing prediction or malformed predicted box instead of
    /// scoring it as a miss.
    pub strict: bool,
    /// Frame width in pixels used for center errors when the ground truth
    /// does not carry its own dimensions.
    pub frame_w: f64,
    /// Frame height in pixels, same proviso.
    pub frame_h: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { strict: false, frame_w: 1280.0, frame_h: 720.0 }
    }
}

#[derive(Debug, Deserialize)]
struct TrackLine {
    video_id: String,
    trajectory: Vec<FrameBoxLine>,
    #[serde(default)]
    width: Option<f64>,
    #[serde(default)]
    height: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct FrameBoxLine {
    frame: u64,
    #[serde(rename = "box")]
    bbox: String,
}

#[derive(Debug, Deserialize)]
struct CaptionLine {
    video_id: String,
    frame: u64,
    text: String,
}

/// Per-video tracking scores.
#[derive(Debug, Clone, Serialize)]
pub struct TrackingVideoScore {
    pub video_id: String,
    /// Frames scored (after any initialization-frame exclusion).
    pub frames: usize,
    /// Frames with no usable prediction, scored as misses.
    pub missing: usize,
    pub auc: f64,
    pub precision: f64,
    pub norm_precision: f64,
}

/// Unweighted means of the per-video tracking scores.
#[derive(Debug, Clone, Serialize)]
pub struct TrackingAggregate {
    pub videos: usize,
    pub auc: f64,
    pub precision: f64,
    pub norm_precision: f64,
}

/// Per-video captioning scores (means over the video's items).
#[derive(Debug, Clone, Serialize)]
pub struct CaptionVideoScore {
    pub video_id: String,
    pub items: usize,
    pub meteor: f64,
    pub cider: f64,
}

/// Corpus-level captioning scores (means over all items).
#[derive(Debug, Clone, Serialize)]
pub struct CaptionAggregate {
    pub videos: usize,
    pub items: usize,
    pub meteor: f64,
    pub cider: f64,
}

/// Task-specific section of the report.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum TaskScores {
    Tracking { videos: Vec<TrackingVideoScore>, aggregate: TrackingAggregate },
    Captioning { videos: Vec<CaptionVideoScore>, aggregate: CaptionAggregate },
}

/// Configuration echoed into the report so results are self-describing.
#[derive(Debug, Clone, Serialize)]
pub struct EvalConfig {
    pub gt: String,
    pub pred: String,
    pub strict: bool,
    pub frame_w: f64,
    pub frame_h: f64,
}

/// Full evaluation result, serializable as the JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub task: Task,
    pub config: EvalConfig,
    #[serde(flatten)]
    pub scores: TaskScores,
    pub warnings: Vec<String>,
}

/// Scores a prediction file against a ground-truth file.
pub fn evaluate_run(
    task: Task,
    gt_path: &Path,
    pred_path: &Path,
    opts: &EvalOptions,
) -> Result<EvalReport, MetricsError> {
    let mut warnings = Vec::new();
    let scores = match task {
        Task::Sot | Task::Rsot => evaluate_tracking(task, gt_path, pred_path, opts, &mut warnings)?,
        Task::Reg => evaluate_captioning(gt_path, pred_path, opts, &mut warnings)?,
    };
    Ok(EvalReport {
        tool: "trackkit",
        version: env!("CARGO_PKG_VERSION"),
        task,
        config: EvalConfig {
            gt: gt_path.display().to_string(),
            pred: pred_path.display().to_string(),
            strict: opts.strict,
            frame_w: opts.frame_w,
            frame_h: opts.frame_h,
        },
        scores,
        warnings,
    })
}

/// Parses a coordinate text field that must contain exactly one valid box.
fn parse_box_strictly(text: &str, context: &str) -> Result<BoundingBox, MetricsError> {
    let tuples = parse_coords(text);
    if tuples.len() != 1 {
        return Err(MetricsError::BadRecord(format!(
            "{context}: expected exactly one coordinate tuple in {text:?}, found {}",
            tuples.len()
        )));
    }
    tuples[0]
        .dequantize()
        .map_err(|e| MetricsError::BadRecord(format!("{context}: {e}")))
}

struct GtTrack {
    video_id: String,
    frames: Vec<(u64, BoundingBox)>,
    frame_w: f64,
    frame_h: f64,
}

fn parse_gt_tracks(path: &Path, opts: &EvalOptions) -> Result<Vec<GtTrack>, MetricsError> {
    let lines: Vec<TrackLine> = read_jsonl(path)?;
    let mut tracks: BTreeMap<String, GtTrack> = BTreeMap::new();
    for line in lines {
        if tracks.contains_key(&line.video_id) {
            return Err(MetricsError::BadRecord(format!(
                "duplicate ground truth for video {:?}",
                line.video_id
            )));
        }
        if line.trajectory.is_empty() {
            return Err(MetricsError::BadRecord(format!(
                "ground truth for video {:?} has an empty trajectory",
                line.video_id
            )));
        }
        let mut frames = Vec::with_capacity(line.trajectory.len());
        for fb in &line.trajectory {
            let context = format!("gt video {:?} frame {}", line.video_id, fb.frame);
            frames.push((fb.frame, parse_box_strictly(&fb.bbox, &context)?));
        }
        if !frames.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(MetricsError::BadRecord(format!(
                "ground truth for video {:?} is not sorted by strictly increasing frame",
                line.video_id
            )));
        }
        tracks.insert(
            line.video_id.clone(),
            GtTrack {
                video_id: line.video_id,
                frames,
                frame_w: line.width.unwrap_or(opts.frame_w),
                frame_h: line.height.unwrap_or(opts.frame_h),
            },
        );
    }
    if tracks.is_empty() {
        return Err(MetricsError::BadRecord(format!(
            "no ground-truth videos in {}",
            path.display()
        )));
    }
    Ok(tracks.into_values().collect())
}

type PredTracks = BTreeMap<String, BTreeMap<u64, BoundingBox>>;

fn parse_pred_tracks(
    path: &Path,
    strict: bool,
    warnings: &mut Vec<String>,
) -> Result<PredTracks, MetricsError> {
    let lines: Vec<TrackLine> = read_jsonl(path)?;
    let mut tracks: PredTracks = BTreeMap::new();
    for line in lines {
        if tracks.contains_key(&line.video_id) {
            let w = format!("duplicate prediction for video {:?}; keeping the first", line.video_id);
            if strict {
                return Err(MetricsError::BadRecord(w));
            }
            warnings.push(w);
            continue;
        }
        let mut frames = BTreeMap::new();
        for fb in &line.trajectory {
            let context = format!("prediction video {:?} frame {}", line.video_id, fb.frame);
            if frames.contains_key(&fb.frame) {
                let w = format!("{context}: duplicate frame; keeping the first");
                if strict {
                    return Err(MetricsError::BadRecord(w));
                }
                warnings.push(w);
                continue;
            }
            match parse_box_strictly(&fb.bbox, &context) {
                Ok(b) => {
                    frames.insert(fb.frame, b);
                }
                Err(e) => {
                    if strict {
                        return Err(e);
                    }
                    warnings.push(format!("{e}; scoring the frame as a miss"));
                }
            }
        }
        tracks.insert(line.video_id, frames);
    }
    Ok(tracks)
}

fn evaluate_tracking(
    task: Task,
    gt_path: &Path,
    pred_path: &Path,
    opts: &EvalOptions,
    warnings: &mut Vec<String>,
) -> Result<TaskScores, MetricsError> {
    let gts = parse_gt_tracks(gt_path, opts)?;
    let preds = parse_pred_tracks(pred_path, opts.strict, warnings)?;

    for video_id in preds.keys() {
        if !gts.iter().any(|g| &g.video_id == video_id) {
            warnings.push(format!("prediction for unknown video {video_id:?} ignored"));
        }
    }

    let mut videos = Vec::with_capacity(gts.len());
    for gt in &gts {
        let eval_frames: &[(u64, BoundingBox)] = match task {
            Task::Sot => {
                if gt.frames.len() < 2 {
                    return Err(MetricsError::BadRecord(format!(
                        "video {:?} has {} ground-truth frame(s); scoring needs at least 2 beyond initialization",
                        gt.video_id,
                        gt.frames.len()
                    )));
                }
                &gt.frames[1..]
            }
            _ => &gt.frames,
        };
        let pred = preds.get(&gt.video_id);
        if pred.is_none() {
            let w = format!("no prediction for video {:?}; scoring zero", gt.video_id);
            if opts.strict {
                return Err(MetricsError::MissingPrediction(w));
            }
            warnings.push(w);
        }

        let mut ious = Vec::with_capacity(eval_frames.len());
        let mut center_errors = Vec::with_capacity(eval_frames.len());
        let mut norm_errors = Vec::with_capacity(eval_frames.len());
        let mut missing = 0usize;
        for (frame, gt_box) in eval_frames {
            match pred.and_then(|p| p.get(frame)) {
                Some(pred_box) => {
                    ious.push(geometry::iou(gt_box, pred_box));
                    center_errors.push(geometry::center_error(
                        gt_box, pred_box, gt.frame_w, gt.frame_h,
                    )?);
                    norm_errors.push(geometry::norm_center_error(gt_box, pred_box)?);
                }
                None => {
                    missing += 1;
                    ious.push(0.0);
                    center_errors.push(f64::INFINITY);
                    norm_errors.push(f64::INFINITY);
                }
            }
        }
        if missing > 0 && pred.is_some() {
            let w = format!(
                "video {:?}: {missing} of {} frames missing from prediction; scored as misses",
                gt.video_id,
                eval_frames.len()
            );
            if opts.strict {
                return Err(MetricsError::MissingPrediction(w));
            }
            warnings.push(w);
        }

        let success = success_curve_from_ious(&ious)?;
        let precision = precision_curve_from_errors(&center_errors)?;
        videos.push(TrackingVideoScore {
            video_id: gt.video_id.clone(),
            frames: eval_frames.len(),
            missing,
            auc: success.auc,
            precision: precision.value_at(PRECISION_PIXELS),
            norm_precision: norm_precision_from_errors(&norm_errors, NORM_PRECISION_THRESHOLD),
        });
    }

    let n = videos.len() as f64;
    let aggregate = TrackingAggregate {
        videos: videos.len(),
        auc: videos.iter().map(|v| v.auc).sum::<f64>() / n,
        precision: videos.iter().map(|v| v.precision).sum::<f64>() / n,
        norm_precision: videos.iter().map(|v| v.norm_precision).sum::<f64>() / n,
    };
    Ok(TaskScores::Tracking { videos, aggregate })
}

fn evaluate_captioning(
    gt_path: &Path,
    pred_path: &Path,
    opts: &EvalOptions,
    warnings: &mut Vec<String>,
) -> Result<TaskScores, MetricsError> {
    let gt_lines: Vec<CaptionLine> = read_jsonl(gt_path)?;
    if gt_lines.is_empty() {
        return Err(MetricsError::BadRecord(format!(
            "no ground-truth captions in {}",
            gt_path.display()
        )));
    }
    let mut refs: BTreeMap<(String, u64), Vec<String>> = BTreeMap::new();
    for line in gt_lines {
        refs.entry((line.video_id, line.frame)).or_default().push(line.text);
    }

    let pred_lines: Vec<CaptionLine> = read_jsonl(pred_path)?;
    let mut preds: BTreeMap<(String, u64), String> = BTreeMap::new();
    for line in pred_lines {
        let key = (line.video_id, line.frame);
        if !refs.contains_key(&key) {
            warnings.push(format!(
                "prediction for unknown item {:?} frame {} ignored",
                key.0, key.1
            ));
            continue;
        }
        if preds.contains_key(&key) {
            let w = format!(
                "duplicate prediction for {:?} frame {}; keeping the first",
                key.0, key.1
            );
            if opts.strict {
                return Err(MetricsError::BadRecord(w));
            }
            warnings.push(w);
            continue;
        }
        preds.insert(key, line.text);
    }

    let mut candidates = Vec::with_capacity(refs.len());
    for key in refs.keys() {
        match preds.get(key) {
            Some(text) => candidates.push(text.clone()),
            None => {
                let w = format!(
                    "no prediction for {:?} frame {}; scoring an empty caption",
                    key.0, key.1
                );
                if opts.strict {
                    return Err(MetricsError::MissingPrediction(w));
                }
                warnings.push(w);
                candidates.push(String::new());
            }
        }
    }

    let reference_sets: Vec<Vec<String>> = refs.values().cloned().collect();
    let cider_per_item = cider_scores(&candidates, &reference_sets)?;
    let mut meteor_per_item = Vec::with_capacity(candidates.len());
    for (cand, rs) in candidates.iter().zip(&reference_sets) {
        meteor_per_item.push(meteor_lite(cand, rs)?);
    }

    let mut per_video: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, key) in refs.keys().enumerate() {
        per_video.entry(key.0.as_str()).or_default().push(i);
    }
    let videos: Vec<CaptionVideoScore> = per_video
        .into_iter()
        .map(|(video_id, idx)| {
            let n = idx.len() as f64;
            CaptionVideoScore {
                video_id: video_id.to_string(),
                items: idx.len(),
                meteor: idx.iter().map(|&i| meteor_per_item[i]).sum::<f64>() / n,
                cider: idx.iter().map(|&i| cider_per_item[i]).sum::<f64>() / n,
            }
        })
        .collect();

    let items = candidates.len();
    let aggregate = CaptionAggregate {
        videos: videos.len(),
        items,
        meteor: meteor_per_item.iter().sum::<f64>() / items as f64,
        cider: cider_per_item.iter().sum::<f64>() / items as f64,
    };
    Ok(TaskScores::Captioning { videos, aggregate })
}

/// Renders a report as a fixed-width text table.
pub fn render_table(report: &EvalReport) -> String {
    let mut out = String::new();
    match &report.scores {
        TaskScores::Tracking { videos, aggregate } => {
            out.push_str(&format!(
                "{:<28} {:>7} {:>8} {:>9} {:>9} {:>9}\n",
                "video", "frames", "missing", "AUC", "P@20px", "P_norm"
            ));
            for v in videos {
                out.push_str(&format!(
                    "{:<28} {:>7} {:>8} {:>9.4} {:>9.4} {:>9.4}\n",
                    v.video_id, v.frames, v.missing, v.auc, v.precision, v.norm_precision
                ));
            }
            out.push_str(&format!(
                "{:<28} {:>7} {:>8} {:>9.4} {:>9.4} {:>9.4}\n",
                format!("mean ({} videos)", aggregate.videos),
                "",
                "",
                aggregate.auc,
                aggregate.precision,
                aggregate.norm_precision
            ));
        }
        TaskScores::Captioning { videos, aggregate } => {
            out.push_str(&format!(
                "{:<28} {:>7} {:>9} {:>9}\n",
                "video", "items", "METEOR", "CIDEr"
            ));
            for v in videos {
                out.push_str(&format!(
                    "{:<28} {:>7} {:>9.4} {:>9.4}\n",
                    v.video_id, v.items, v.meteor, v.cider
                ));
            }
            out.push_str(&format!(
                "{:<28} {:>7} {:>9.4} {:>9.4}\n",
                format!("mean ({} videos)", aggregate.videos),
                aggregate.items,
                aggregate.meteor,
                aggregate.cider
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(path: &Path, lines: &[&str]) {
        fs::write(path, lines.join("\n") + "\n").unwrap();
    }

    fn track_line(video: &str, boxes: &[(u64, &str)]) -> String {
        let traj: Vec<String> = boxes
            .iter()
            .map(|(f, b)| format!("{{\"frame\":{f},\"box\":\"{b}\"}}"))
            .collect();
        format!("{{\"video_id\":\"{video}\",\"trajectory\":[{}]}}", traj.join(","))
    }

    #[test]
    fn sot_excludes_first_frame_and_rsot_keeps_it() {
        let dir = tempfile::tempdir().unwrap();
        let gt_path = dir.path().join("gt.jsonl");
        let pred_path = dir.path().join("pred.jsonl");
        let gt = track_line("v", &[(0, "[10,10,30,30]"), (1, "[12,10,32,30]"), (2, "[14,10,34,30]")]);
        // frame 0 is wrong, the rest are exact
        let pred = track_line("v", &[(0, "[60,60,90,90]"), (1, "[12,10,32,30]"), (2, "[14,10,34,30]")]);
        write(&gt_path, &[&gt]);
        write(&pred_path, &[&pred]);

        let opts = EvalOptions::default();
        let sot = evaluate_run(Task::Sot, &gt_path, &pred_path, &opts).unwrap();
        let rsot = evaluate_run(Task::Rsot, &gt_path, &pred_path, &opts).unwrap();
        let (sot_auc, rsot_auc) = match (&sot.scores, &rsot.scores) {
            (
                TaskScores::Tracking { aggregate: a, .. },
                TaskScores::Tracking { aggregate: b, .. },
            ) => (a.auc, b.auc),
            _ => unreachable!(),
        };
        assert!((sot_auc - 20.0 / 21.0).abs() < 1e-12, "sot auc {sot_auc}");
        // rsot scores 3 frames, one of which is a total miss
        assert!((rsot_auc - (2.0 / 3.0) * (20.0 / 21.0)).abs() < 1e-12, "rsot auc {rsot_auc}");
        match &sot.scores {
            TaskScores::Tracking { videos, .. } => {
                assert_eq!(videos[0].frames, 2);
                assert_eq!(videos[0].precision, 1.0);
                assert_eq!(videos[0].norm_precision, 1.0);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn missing_predictions_score_zero_and_warn() {
        let dir = tempfile::tempdir().unwrap();
        let gt_path = dir.path().join("gt.jsonl");
        let pred_path = dir.path().join("pred.jsonl");
        let gt_a = track_line("a", &[(0, "[10,10,30,30]"), (1, "[12,10,32,30]")]);
        let gt_b = track_line("b", &[(0, "[10,10,30,30]"), (1, "[12,10,32,30]")]);
        let pred_a = track_line("a", &[(0, "[10,10,30,30]"), (1, "[12,10,32,30]")]);
        write(&gt_path, &[&gt_a, &gt_b]);
        write(&pred_path, &[&pred_a]);

        let report = evaluate_run(Task::Rsot, &gt_path, &pred_path, &EvalOptions::default()).unwrap();
        match &report.scores {
            TaskScores::Tracking { videos, aggregate } => {
                assert_eq!(videos.len(), 2);
                assert_eq!(videos[1].auc, 0.0);
                assert_eq!(videos[1].missing, 2);
                assert!((aggregate.auc - (20.0 / 21.0) / 2.0).abs() < 1e-12);
            }
            _ => unreachable!(),
        }
        assert!(report.warnings.iter().any(|w| w.contains("no prediction")));

        let strict = EvalOptions { strict: true, ..Default::default() };
        assert!(matches!(
            evaluate_run(Task::Rsot, &gt_path, &pred_path, &strict),
            Err(MetricsError::MissingPrediction(_))
        ));
    }

    #[test]
    fn malformed_predictions_are_misses_unless_strict() {
        let dir = tempfile::tempdir().unwrap();
        let gt_path = dir.path().join("gt.jsonl");
        let pred_path = dir.path().join("pred.jsonl");
        write(&gt_path, &[&track_line("v", &[(0, "[10,10,30,30]"), (1, "[10,10,30,30]")])]);
        // frame 1's text has no parsable tuple
        write(&pred_path, &[&track_line("v", &[(0, "[10,10,30,30]"), (1, "far away")])]);

        let report = evaluate_run(Task::Rsot, &gt_path, &pred_path, &EvalOptions::default()).unwrap();
        match &report.scores {
            TaskScores::Tracking { videos, .. } => assert_eq!(videos[0].missing, 1),
            _ => unreachable!(),
        }
        let strict = EvalOptions { strict: true, ..Default::default() };
        assert!(evaluate_run(Task::Rsot, &gt_path, &pred_path, &strict).is_err());
    }

    #[test]
    fn gt_validation_rejects_duplicates_and_disorder() {
        let dir = tempfile::tempdir().unwrap();
        let gt_path = dir.path().join("gt.jsonl");
        let pred_path = dir.path().join("pred.jsonl");
        let line = track_line("v", &[(0, "[10,10,30,30]"), (1, "[10,10,30,30]")]);
        write(&pred_path, &[&line]);

        write(&gt_path, &[&line, &line]);
        assert!(matches!(
            evaluate_run(Task::Rsot, &gt_path, &pred_path, &EvalOptions::default()),
            Err(MetricsError::BadRecord(_))
        ));

        write(&gt_path, &[&track_line("v", &[(1, "[10,10,30,30]"), (0, "[10,10,30,30]")])]);
        assert!(matches!(
            evaluate_run(Task::Rsot, &gt_path, &pred_path, &EvalOptions::default()),
            Err(MetricsError::BadRecord(_))
        ));
    }

    #[test]
    fn reg_scores_match_direct_metric_calls() {
        let dir = tempfile::tempdir().unwrap();
        let gt_path = dir.path().join("gt.jsonl");
        let pred_path = dir.path().join("pred.jsonl");
        write(
            &gt_path,
            &[
                r#"{"video_id":"a","frame":0,"text":"a red car on the road"}"#,
                r#"{"video_id":"a","frame":0,"text":"the red car drives"}"#,
                r#"{"video_id":"a","frame":5,"text":"a dog chases the car"}"#,
                r#"{"video_id":"b","frame":2,"text":"two birds fly over water"}"#,
            ],
        );
        write(
            &pred_path,
            &[
                r#"{"video_id":"a","frame":0,"text":"a red car on the road"}"#,
                r#"{"video_id":"a","frame":5,"text":"a dog chases the car"}"#,
                r#"{"video_id":"b","frame":2,"text":"birds flying over water"}"#,
            ],
        );
        let report = evaluate_run(Task::Reg, &gt_path, &pred_path, &EvalOptions::default()).unwrap();
        match &report.scores {
            TaskScores::Captioning { videos, aggregate } => {
                assert_eq!(videos.len(), 2);
                assert_eq!(videos[0].items, 2);
                assert_eq!(videos[1].items, 1);
                assert_eq!(aggregate.items, 3);

                // mirror the computation with direct metric calls
                let cands = vec![
                    "a red car on the road".to_string(),
                    "a dog chases the car".to_string(),
                    "birds flying over water".to_string(),
                ];
                let refs = vec![
                    vec!["a red car on the road".to_string(), "the red car drives".to_string()],
                    vec!["a dog chases the car".to_string()],
                    vec!["two birds fly over water".to_string()],
                ];
                let cider = cider_scores(&cands, &refs).unwrap();
                let expect_cider = cider.iter().sum::<f64>() / 3.0;
                assert!((aggregate.cider - expect_cider).abs() < 1e-12);
                let expect_meteor: f64 = cands
                    .iter()
                    .zip(&refs)
                    .map(|(c, r)| meteor_lite(c, r).unwrap())
                    .sum::<f64>()
                    / 3.0;
                assert!((aggregate.meteor - expect_meteor).abs() < 1e-12);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn reg_missing_prediction_scores_empty_caption() {
        let dir = tempfile::tempdir().unwrap();
        let gt_path = dir.path().join("gt.jsonl");
        let pred_path = dir.path().join("pred.jsonl");
        write(
            &gt_path,
            &[
                r#"{"video_id":"a","frame":0,"text":"a red car"}"#,
                r#"{"video_id":"b","frame":0,"text":"a blue bird"}"#,
            ],
        );
        write(&pred_path, &[r#"{"video_id":"a","frame":0,"text":"a red car"}"#]);
        let report = evaluate_run(Task::Reg, &gt_path, &pred_path, &EvalOptions::default()).unwrap();
        match &report.scores {
            TaskScores::Captioning { videos, .. } => {
                assert_eq!(videos[1].meteor, 0.0);
                assert_eq!(videos[1].cider, 0.0);
            }
            _ => unreachable!(),
        }
        assert!(report.warnings.iter().any(|w| w.contains("no prediction")));
        let strict = EvalOptions { strict: true, ..Default::default() };
        assert!(evaluate_run(Task::Reg, &gt_path, &pred_path, &strict).is_err());
    }

    #[test]
    fn table_rendering_is_stable() {
        let dir = tempfile::tempdir().unwrap();
        let gt_path = dir.path().join("gt.jsonl");
        let pred_path = dir.path().join("pred.jsonl");
        let line = track_line("v", &[(0, "[10,10,30,30]"), (1, "[12,10,32,30]")]);
        write(&gt_path, &[&line]);
        write(&pred_path, &[&line]);
        let report = evaluate_run(Task::Rsot, &gt_path, &pred_path, &EvalOptions::default()).unwrap();
        let table = render_table(&report);
        assert!(table.contains("video"));
        assert!(table.contains("mean (1 videos)"));
        assert_eq!(table, render_table(&report));
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"task\":\"rsot\""));
        assert!(json.contains("\"aggregate\""));
    }
}
