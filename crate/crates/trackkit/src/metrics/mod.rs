//! Tracking and captioning evaluation: success/precision curves and their
//! areas, plus the caption metrics in [`text`] and run-level evaluation over
//! JSONL files in [`eval`].

pub mod eval;
pub mod text;

use thiserror::Error;

use crate::geometry::{self, BoundingBox, GeometryError};
use crate::jsonl::JsonlError;

pub use eval::{evaluate_run, render_table, EvalOptions, EvalReport, Task};

/// Errors from metric computation and run evaluation.
#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("trajectories are not frame-aligned: {0}")]
    FrameMismatch(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("caption corpus is empty")]
    EmptyCorpus,
    #[error("{candidates} candidates but {references} reference sets")]
    MismatchedLengths { candidates: usize, references: usize },
    #[error("candidate {index} has no references")]
    EmptyReferences { index: usize },
    #[error("bad record: {0}")]
    BadRecord(String),
    #[error("missing prediction: {0}")]
    MissingPrediction(String),
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// A metric evaluated on a threshold grid, with its area under the curve
/// (the mean of the values, i.e. the AUC of the curve normalized by the
/// threshold range).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalCurve {
    pub thresholds: Vec<f64>,
    pub values: Vec<f64>,
    pub auc: f64,
}

impl EvalCurve {
    fn from_values(thresholds: Vec<f64>, values: Vec<f64>) -> Self {
        let auc = values.iter().sum::<f64>() / values.len() as f64;
        EvalCurve { thresholds, values, auc }
    }

    /// Curve value at the grid point closest to `threshold`.
    pub fn value_at(&self, threshold: f64) -> f64 {
        let mut best = 0;
        for (i, t) in self.thresholds.iter().enumerate() {
            if (t - threshold).abs() < (self.thresholds[best] - threshold).abs() {
                best = i;
            }
        }
        self.values[best]
    }
}

/// The default success-curve grid: 21 overlap thresholds from 0 to 1.
pub fn overlap_thresholds() -> Vec<f64> {
    (0..=20).map(|i| i as f64 * 0.05).collect()
}

/// The default precision-curve grid: 51 pixel thresholds from 0 to 50.
pub fn pixel_thresholds() -> Vec<f64> {
    (0..=50).map(|i| i as f64).collect()
}

/// Success curve over per-frame overlaps: at each threshold, the fraction of
/// frames whose IoU strictly exceeds it.
pub fn success_curve_from_ious(ious: &[f64]) -> Result<EvalCurve, MetricsError> {
    if ious.is_empty() {
        return Err(MetricsError::EmptyTrajectory);
    }
    let thresholds = overlap_thresholds();
    let n = ious.len() as f64;
    let values = thresholds
        .iter()
        .map(|&t| ious.iter().filter(|&&v| v > t).count() as f64 / n)
        .collect();
    Ok(EvalCurve::from_values(thresholds, values))
}

/// Precision curve over per-frame center errors (pixels): at each threshold,
/// the fraction of frames whose error is at most the threshold.
pub fn precision_curve_from_errors(errors: &[f64]) -> Result<EvalCurve, MetricsError> {
    if errors.is_empty() {
        return Err(MetricsError::EmptyTrajectory);
    }
    let thresholds = pixel_thresholds();
    let n = errors.len() as f64;
    let values = thresholds
        .iter()
        .map(|&t| errors.iter().filter(|&&e| e <= t).count() as f64 / n)
        .collect();
    Ok(EvalCurve::from_values(thresholds, values))
}

fn check_aligned(
    gt: &[(u64, BoundingBox)],
    pred: &[(u64, BoundingBox)],
) -> Result<(), MetricsError> {
    if gt.is_empty() || pred.is_empty() {
        return Err(MetricsError::EmptyTrajectory);
    }
    if gt.len() != pred.len() {
        return Err(MetricsError::FrameMismatch(format!(
            "{} ground-truth frames vs {} predicted",
            gt.len(),
            pred.len()
        )));
    }
    for ((gf, _), (pf, _)) in gt.iter().zip(pred) {
        if gf != pf {
            return Err(MetricsError::FrameMismatch(format!(
                "ground truth has frame {gf} where prediction has {pf}"
            )));
        }
    }
    Ok(())
}

/// Success curve for frame-aligned ground-truth and predicted trajectories.
pub fn success_curve(
    gt: &[(u64, BoundingBox)],
    pred: &[(u64, BoundingBox)],
) -> Result<EvalCurve, MetricsError> {
    check_aligned(gt, pred)?;
    let ious: Vec<f64> = gt
        .iter()
        .zip(pred)
        .map(|((_, g), (_, p))| geometry::iou(g, p))
        .collect();
    success_curve_from_ious(&ious)
}

/// Precision curve for frame-aligned trajectories, with center errors
/// measured in pixels under the given frame dimensions.
pub fn precision_curve(
    gt: &[(u64, BoundingBox)],
    pred: &[(u64, BoundingBox)],
    frame_w: f64,
    frame_h: f64,
) -> Result<EvalCurve, MetricsError> {
    check_aligned(gt, pred)?;
    let errors = gt
        .iter()
        .zip(pred)
        .map(|((_, g), (_, p))| geometry::center_error(g, p, frame_w, frame_h))
        .collect::<Result<Vec<f64>, _>>()?;
    precision_curve_from_errors(&errors)
}

/// Normalized precision: the fraction of frames whose center error, scaled
/// by the ground-truth box size, is at most `threshold` (conventionally 0.2).
pub fn norm_precision(
    gt: &[(u64, BoundingBox)],
    pred: &[(u64, BoundingBox)],
    threshold: f64,
) -> Result<f64, MetricsError> {
    check_aligned(gt, pred)?;
    let errors = gt
        .iter()
        .zip(pred)
        .map(|((_, g), (_, p))| geometry::norm_center_error(g, p))
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(norm_precision_from_errors(&errors, threshold))
}

/// Normalized precision over precomputed normalized center errors.
pub fn norm_precision_from_errors(errors: &[f64], threshold: f64) -> f64 {
    if errors.is_empty() {
        return 0.0;
    }
    errors.iter().filter(|&&e| e <= threshold).count() as f64 / errors.len() as f64
}

/// The conventional normalized-precision threshold.
pub const NORM_PRECISION_THRESHOLD: f64 = 0.2;
/// The conventional pixel threshold reported as "precision".
pub const PRECISION_PIXELS: f64 = 20.0;
