//! Constant-velocity Kalman filtering over boxes and trajectory drift checks.
//!
//! The filter follows the convention common in tracking-by-detection systems:
//! an 8-dimensional state `(cx, cy, a, h, vcx, vcy, va, vh)` where `a` is the
//! aspect ratio `w / h`, with process and measurement noise scaled by the
//! current box height. Drift detection runs the filter along a trajectory and
//! flags frames whose squared Mahalanobis gating distance exceeds a
//! threshold; flagged frames do not update the filter, so a single glitch is
//! judged against the smooth track, not against itself.

use nalgebra::{SMatrix, SVector};
use thiserror::Error;

use crate::geometry::BoundingBox;

type Vec4 = SVector<f64, 4>;
type Vec8 = SVector<f64, 8>;
type Mat4 = SMatrix<f64, 4, 4>;
type Mat8 = SMatrix<f64, 8, 8>;
type Mat4x8 = SMatrix<f64, 4, 8>;

/// Position noise scale relative to box height.
pub const STD_WEIGHT_POSITION: f64 = 1.0 / 20.0;
/// Velocity noise scale relative to box height.
pub const STD_WEIGHT_VELOCITY: f64 = 1.0 / 160.0;
/// Default gating threshold: the 0.999 chi-square quantile at 4 degrees of
/// freedom, the dimensionality of the measurement.
pub const DEFAULT_GATE_THRESHOLD: f64 = 18.47;

/// Errors from filtering and drift detection.
#[derive(Debug, Error, PartialEq)]
pub enum KalmanError {
    /// Measurements need a positive-area box to form an aspect ratio.
    #[error("degenerate box: filter measurements need positive width and height")]
    DegenerateBox,
    /// The innovation covariance could not be factorized.
    #[error("singular innovation covariance")]
    SingularCovariance,
    /// Drift detection needs at least two frames.
    #[error("trajectory too short for drift detection: {0} frame(s), need at least 2")]
    TooShort(usize),
}

/// Filter state: mean and covariance of `(cx, cy, a, h)` and its velocities.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanState {
    pub mean: Vec8,
    pub covariance: Mat8,
}

/// Result of running drift detection along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    /// Frame indices whose gating distance exceeded the threshold.
    pub flagged_frames: Vec<u64>,
    /// Largest gating distance observed anywhere on the trajectory.
    pub max_gate_distance: f64,
    /// True when any frame was flagged.
    pub drifted: bool,
}

/// Converts a box to the measurement vector `(cx, cy, a, h)`.
fn measurement(b: &BoundingBox) -> Result<Vec4, KalmanError> {
    let (w, h) = (b.width(), b.height());
    if w <= 0.0 || h <= 0.0 {
        return Err(KalmanError::DegenerateBox);
    }
    let (cx, cy) = b.center();
    Ok(Vec4::new(cx, cy, w / h, h))
}

/// Initializes the filter on a first observation: the positional part of the
/// mean is the measurement, velocities start at zero, and the covariance is a
/// diagonal scaled by the observed height.
pub fn kf_init(b: &BoundingBox) -> Result<KalmanState, KalmanError> {
    let z = measurement(b)?;
    let h = z[3];
    let mut mean = Vec8::zeros();
    for i in 0..4 {
        mean[i] = z[i];
    }
    let std = [
        2.0 * STD_WEIGHT_POSITION * h,
        2.0 * STD_WEIGHT_POSITION * h,
        1e-2,
        2.0 * STD_WEIGHT_POSITION * h,
        10.0 * STD_WEIGHT_VELOCITY * h,
        10.0 * STD_WEIGHT_VELOCITY * h,
        1e-5,
        10.0 * STD_WEIGHT_VELOCITY * h,
    ];
    let mut covariance = Mat8::zeros();
    for (i, s) in std.iter().enumerate() {
        covariance[(i, i)] = s * s;
    }
    Ok(KalmanState { mean, covariance })
}

/// One constant-velocity prediction step (unit time step).
pub fn kf_predict(state: &KalmanState) -> KalmanState {
    let h = state.mean[3];
    let std = [
        STD_WEIGHT_POSITION * h,
        STD_WEIGHT_POSITION * h,
        1e-2,
        STD_WEIGHT_POSITION * h,
        STD_WEIGHT_VELOCITY * h,
        STD_WEIGHT_VELOCITY * h,
        1e-5,
        STD_WEIGHT_VELOCITY * h,
    ];
    let mut motion_cov = Mat8::zeros();
    for (i, s) in std.iter().enumerate() {
        motion_cov[(i, i)] = s * s;
    }
    let mut f = Mat8::identity();
    for i in 0..4 {
        f[(i, i + 4)] = 1.0;
    }
    let mean = f * state.mean;
    let covariance = f * state.covariance * f.transpose() + motion_cov;
    KalmanState { mean, covariance }
}

/// Projects the state into measurement space: predicted measurement and
/// innovation covariance `S = H P H' + R`.
fn project(state: &KalmanState) -> (Vec4, Mat4) {
    let h = state.mean[3];
    let std = [
        STD_WEIGHT_POSITION * h,
        STD_WEIGHT_POSITION * h,
        1e-1,
        STD_WEIGHT_POSITION * h,
    ];
    let mut meas_cov = Mat4::zeros();
    for (i, s) in std.iter().enumerate() {
        meas_cov[(i, i)] = s * s;
    }
    let mut hm = Mat4x8::zeros();
    for i in 0..4 {
        hm[(i, i)] = 1.0;
    }
    let projected_mean = hm * state.mean;
    let s = hm * state.covariance * hm.transpose() + meas_cov;
    (projected_mean, s)
}

/// Measurement update with a new box observation.
///
/// The posterior covariance `P - K S K'` is re-symmetrized to keep repeated
/// updates numerically positive semi-definite.
pub fn kf_update(state: &KalmanState, b: &BoundingBox) -> Result<KalmanState, KalmanError> {
    let z = measurement(b)?;
    let (projected_mean, s) = project(state);
    let chol = nalgebra::Cholesky::new(s).ok_or(KalmanError::SingularCovariance)?;
    let mut hm = Mat4x8::zeros();
    for i in 0..4 {
        hm[(i, i)] = 1.0;
    }
    // K = P H' S^-1, computed as K' = S^-1 (H P) via the factorization.
    let kt = chol.solve(&(hm * state.covariance));
    let k = kt.transpose();
    let innovation = z - projected_mean;
    let mean = state.mean + k * innovation;
    let covariance = state.covariance - k * s * k.transpose();
    let covariance = (covariance + covariance.transpose()) * 0.5;
    Ok(KalmanState { mean, covariance })
}

/// Squared Mahalanobis distance between an observation and the state's
/// predicted measurement, under the innovation covariance.
pub fn gate_distance(state: &KalmanState, b: &BoundingBox) -> Result<f64, KalmanError> {
    let z = measurement(b)?;
    let (projected_mean, s) = project(state);
    let chol = nalgebra::Cholesky::new(s).ok_or(KalmanError::SingularCovariance)?;
    let innovation = z - projected_mean;
    Ok(innovation.dot(&chol.solve(&innovation)))
}

/// Runs the filter along a trajectory of `(frame, box)` observations and
/// flags frames that fail the gate.
///
/// The filter initializes on the first observation. Every later observation
/// is gated against the prediction for its step; observations that pass
/// update the filter, flagged ones are skipped so the filter coasts through
/// glitches. Frames must be in increasing order; each observation is treated
/// as one unit time step regardless of frame-index gaps.
pub fn drift_check(
    track: &[(u64, BoundingBox)],
    gate_threshold: f64,
) -> Result<DriftReport, KalmanError> {
    if track.len() < 2 {
        return Err(KalmanError::TooShort(track.len()));
    }
    let mut state = kf_init(&track[0].1)?;
    let mut flagged_frames = Vec::new();
    let mut max_gate_distance = 0.0f64;
    for (frame, b) in &track[1..] {
        state = kf_predict(&state);
        let d = gate_distance(&state, b)?;
        max_gate_distance = max_gate_distance.max(d);
        if d > gate_threshold {
            flagged_frames.push(*frame);
        } else {
            state = kf_update(&state, b)?;
        }
    }
    Ok(DriftReport { drifted: !flagged_frames.is_empty(), flagged_frames, max_gate_distance })
}
