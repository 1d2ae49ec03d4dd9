//! C ABI for the trackkit toolkit.
//!
//! Every function returns a [`TkStatus`] and writes results through out
//! pointers; stateful objects (the constant-velocity filter, the token
//! selector) are opaque handles created and destroyed by paired `_new`/`_free`
//! calls. Panics never cross the boundary: they are caught and reported as
//! [`TkStatus::Internal`].
//!
//! Array arguments follow one convention throughout: the caller passes a
//! buffer and its capacity, the function reports how many elements exist, and
//! a null buffer queries that count without copying. `TK_STATUS_BUFFER_TOO_SMALL`
//! means the count is correct but the copy was truncated to the capacity.
//!
//! The companion header `include/trackkit.h` is generated by cbindgen at
//! build time.

use core::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use trackkit::geometry::{self, BoundingBox, GeometryError, QuantBox};
use trackkit::harness::{self, HarnessError};
use trackkit::kalman::{self, KalmanError, KalmanState};
use trackkit::metrics::{self, text as text_metrics, MetricsError};
use trackkit::tselector::{self, SelectorError, SelectorParams};

// ---------------------------------------------------------------------------
// Status codes
// ---------------------------------------------------------------------------

/// Result of every call in this API.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TkStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument failed validation (bad box corners, zero counts,
    /// mismatched dimensions, out-of-range coordinates).
    InvalidArgument = 2,
    /// The input sequence has too few elements for the operation.
    TooShort = 3,
    /// The output buffer capacity is smaller than the result; counts are
    /// still reported so the caller can retry with a larger buffer.
    BufferTooSmall = 4,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 5,
    /// A covariance factorization failed.
    SingularCovariance = 6,
    /// An unexpected internal failure (including a caught panic).
    Internal = 7,
}

impl From<GeometryError> for TkStatus {
    fn from(_: GeometryError) -> Self {
        TkStatus::InvalidArgument
    }
}

impl From<KalmanError> for TkStatus {
    fn from(e: KalmanError) -> Self {
        match e {
            KalmanError::DegenerateBox => TkStatus::InvalidArgument,
            KalmanError::SingularCovariance => TkStatus::SingularCovariance,
            KalmanError::TooShort(_) => TkStatus::TooShort,
        }
    }
}

impl From<MetricsError> for TkStatus {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::EmptyTrajectory | MetricsError::EmptyCorpus => TkStatus::TooShort,
            _ => TkStatus::InvalidArgument,
        }
    }
}

impl From<SelectorError> for TkStatus {
    fn from(e: SelectorError) -> Self {
        match e {
            SelectorError::Io(_) => TkStatus::Internal,
            _ => TkStatus::InvalidArgument,
        }
    }
}

impl From<HarnessError> for TkStatus {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::TooShort(_) => TkStatus::TooShort,
            HarnessError::EmptyVideo | HarnessError::InvalidParams(_) => {
                TkStatus::InvalidArgument
            }
            _ => TkStatus::Internal,
        }
    }
}

/// Runs a fallible body, translating panics into [`TkStatus::Internal`].
fn guarded(f: impl FnOnce() -> Result<(), TkStatus>) -> TkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TkStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => TkStatus::Internal,
    }
}

macro_rules! nonnull {
    ($ptr:expr) => {
        if $ptr.is_null() {
            return Err(TkStatus::NullPointer);
        }
    };
}

/// Static, NUL-terminated name of a status code.
#[no_mangle]
pub extern "C" fn tk_status_name(status: TkStatus) -> *const c_char {
    let name: &'static [u8] = match status {
        TkStatus::Ok => b"ok\0",
        TkStatus::NullPointer => b"null pointer\0",
        TkStatus::InvalidArgument => b"invalid argument\0",
        TkStatus::TooShort => b"input too short\0",
        TkStatus::BufferTooSmall => b"buffer too small\0",
        TkStatus::InvalidUtf8 => b"invalid utf-8\0",
        TkStatus::SingularCovariance => b"singular covariance\0",
        TkStatus::Internal => b"internal error\0",
    };
    name.as_ptr() as *const c_char
}

/// Static, NUL-terminated library version string.
#[no_mangle]
pub extern "C" fn tk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

// ---------------------------------------------------------------------------
// Plain-data geometry types
// ---------------------------------------------------------------------------

/// An axis-aligned box in normalized `[0, 1]` image coordinates.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TkBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl TkBox {
    fn validate(self) -> Result<BoundingBox, TkStatus> {
        BoundingBox::new(self.x1, self.y1, self.x2, self.y2).map_err(TkStatus::from)
    }

    fn from_lib(b: &BoundingBox) -> Self {
        let [x1, y1, x2, y2] = b.to_array();
        TkBox { x1, y1, x2, y2 }
    }
}

/// A box quantized to integer bins in `[0, 99]`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TkQuantBox {
    pub x1: u8,
    pub y1: u8,
    pub x2: u8,
    pub y2: u8,
}

impl TkQuantBox {
    fn validate(self) -> Result<QuantBox, TkStatus> {
        QuantBox::new(self.x1 as i64, self.y1 as i64, self.x2 as i64, self.y2 as i64)
            .map_err(TkStatus::from)
    }

    fn from_lib(q: &QuantBox) -> Self {
        let [x1, y1, x2, y2] = q.to_array();
        TkQuantBox { x1, y1, x2, y2 }
    }
}

/// A half-open frame range `[start, end)` scheduled as one tracking clip.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TkClip {
    pub start: u64,
    pub end: u64,
}

/// Copies `items` into `out[..cap]`, reporting the true length in `count`.
///
/// A null `out` only queries the count. Returns `BufferTooSmall` when the
/// copy was truncated.
fn write_slice<T: Copy>(
    items: &[T],
    out: *mut T,
    cap: usize,
    count: *mut usize,
) -> Result<(), TkStatus> {
    if !count.is_null() {
        unsafe { *count = items.len() };
    }
    if out.is_null() {
        return Ok(());
    }
    let n = items.len().min(cap);
    unsafe { std::ptr::copy_nonoverlapping(items.as_ptr(), out, n) };
    if items.len() > cap {
        return Err(TkStatus::BufferTooSmall);
    }
    Ok(())
}

/// Reads a caller-provided NUL-terminated UTF-8 string.
///
/// # Safety
/// `ptr` must point to a NUL-terminated string valid for the duration of the
/// call.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, TkStatus> {
    if ptr.is_null() {
        return Err(TkStatus::NullPointer);
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| TkStatus::InvalidUtf8)
}

// ---------------------------------------------------------------------------
// Geometry and the coordinate codec
// ---------------------------------------------------------------------------

/// Intersection-over-union of two boxes, written to `out`.
///
/// # Safety
/// `out` must be valid for one `double`.
#[no_mangle]
pub unsafe extern "C" fn tk_iou(a: TkBox, b: TkBox, out: *mut f64) -> TkStatus {
    guarded(|| {
        nonnull!(out);
        let (a, b) = (a.validate()?, b.validate()?);
        unsafe { *out = geometry::iou(&a, &b) };
        Ok(())
    })
}

/// Center distance in pixels between two boxes on a `frame_w x frame_h` image.
///
/// # Safety
/// `out` must be valid for one `double`.
#[no_mangle]
pub unsafe extern "C" fn tk_center_error(
    gt: TkBox,
    pred: TkBox,
    frame_w: f64,
    frame_h: f64,
    out: *mut f64,
) -> TkStatus {
    guarded(|| {
        nonnull!(out);
        let (gt, pred) = (gt.validate()?, pred.validate()?);
        let e = geometry::center_error(&gt, &pred, frame_w, frame_h).map_err(TkStatus::from)?;
        unsafe { *out = e };
        Ok(())
    })
}

/// Center distance normalized by the ground-truth box dimensions.
///
/// # Safety
/// `out` must be valid for one `double`.
#[no_mangle]
pub unsafe extern "C" fn tk_norm_center_error(
    gt: TkBox,
    pred: TkBox,
    out: *mut f64,
) -> TkStatus {
    guarded(|| {
        nonnull!(out);
        let (gt, pred) = (gt.validate()?, pred.validate()?);
        let e = geometry::norm_center_error(&gt, &pred).map_err(TkStatus::from)?;
        unsafe { *out = e };
        Ok(())
    })
}

/// Quantizes a normalized box to integer bins.
///
/// # Safety
/// `out` must be valid for one `TkQuantBox`.
#[no_mangle]
pub unsafe extern "C" fn tk_quantize(b: TkBox, out: *mut TkQuantBox) -> TkStatus {
    guarded(|| {
        nonnull!(out);
        let b = b.validate()?;
        unsafe { *out = TkQuantBox::from_lib(&b.quantize()) };
        Ok(())
    })
}

/// Maps a quantized box back to the normalized centers of its bins.
///
/// # Safety
/// `out` must be valid for one `TkBox`.
#[no_mangle]
pub unsafe extern "C" fn tk_dequantize(q: TkQuantBox, out: *mut TkBox) -> TkStatus {
    guarded(|| {
        nonnull!(out);
        let q = q.validate()?;
        let b = q.dequantize().map_err(TkStatus::from)?;
        unsafe { *out = TkBox::from_lib(&b) };
        Ok(())
    })
}

/// Writes the `[x1,y1,x2,y2]` coordinate text of a quantized box,
/// NUL-terminated, into `buf`. Sixteen bytes are always enough.
///
/// # Safety
/// `buf` must be valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn tk_format_coords(
    q: TkQuantBox,
    buf: *mut c_char,
    cap: usize,
) -> TkStatus {
    guarded(|| {
        nonnull!(buf);
        let text = q.validate()?.to_string();
        if text.len() + 1 > cap {
            return Err(TkStatus::BufferTooSmall);
        }
        unsafe {
            std::ptr::copy_nonoverlapping(text.as_ptr(), buf as *mut u8, text.len());
            *buf.add(text.len()) = 0;
        }
        Ok(())
    })
}

/// Extracts every well-formed `[x1,y1,x2,y2]` tuple from `text` in order,
/// skipping malformed or out-of-range ones. Writes up to `cap` boxes to `out`
/// and the total number found to `found`; a null `out` only counts.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be valid for `cap` boxes and
/// `found` for one `size_t` when non-null.
#[no_mangle]
pub unsafe extern "C" fn tk_parse_coords(
    text: *const c_char,
    out: *mut TkQuantBox,
    cap: usize,
    found: *mut usize,
) -> TkStatus {
    guarded(|| {
        let text = unsafe { read_str(text) }?;
        let boxes: Vec<TkQuantBox> =
            geometry::parse_coords(text).iter().map(TkQuantBox::from_lib).collect();
        write_slice(&boxes, out, cap, found)
    })
}

// ---------------------------------------------------------------------------
// Constant-velocity filter
// ---------------------------------------------------------------------------

/// Opaque constant-velocity filter state over `(cx, cy, a, h)` and its
/// velocities.
pub struct TkKalman {
    state: KalmanState,
}

/// Creates a filter initialized on a first observed box. The new handle is
/// written to `out` and must be released with `tk_kalman_free`.
///
/// # Safety
/// `out` must be valid for one pointer.
#[no_mangle]
pub unsafe extern "C" fn tk_kalman_new(b: TkBox, out: *mut *mut TkKalman) -> TkStatus {
    guarded(|| {
        nonnull!(out);
        let state = kalman::kf_init(&b.validate()?).map_err(TkStatus::from)?;
        unsafe { *out = Box::into_raw(Box::new(TkKalman { state })) };
        Ok(())
    })
}

/// Advances the filter one time step in place.
///
/// # Safety
/// `k` must be a live handle from `tk_kalman_new`.
#[no_mangle]
pub unsafe extern "C" fn tk_kalman_predict(k: *mut TkKalman) -> TkStatus {
    guarded(|| {
        nonnull!(k);
        let k = unsafe { &mut *k };
        k.state = kalman::kf_predict(&k.state);
        Ok(())
    })
}

/// Folds an observed box into the filter in place.
///
/// # Safety
/// `k` must be a live handle from `tk_kalman_new`.
#[no_mangle]
pub unsafe extern "C" fn tk_kalman_update(k: *mut TkKalman, b: TkBox) -> TkStatus {
    guarded(|| {
        nonnull!(k);
        let k = unsafe { &mut *k };
        k.state = kalman::kf_update(&k.state, &b.validate()?).map_err(TkStatus::from)?;
        Ok(())
    })
}

/// Squared Mahalanobis distance of an observation from the predicted state,
/// written to `out`.
///
/// # Safety
/// `k` must be a live handle; `out` must be valid for one `double`.
#[no_mangle]
pub unsafe extern "C" fn tk_kalman_gate_distance(
    k: *const TkKalman,
    b: TkBox,
    out: *mut f64,
) -> TkStatus {
    guarded(|| {
        nonnull!(k);
        nonnull!(out);
        let k = unsafe { &*k };
        let d = kalman::gate_distance(&k.state, &b.validate()?).map_err(TkStatus::from)?;
        unsafe { *out = d };
        Ok(())
    })
}

/// Copies the eight-dimensional state mean into `out`.
///
/// # Safety
/// `k` must be a live handle; `out` must be valid for eight `double`s.
#[no_mangle]
pub unsafe extern "C" fn tk_kalman_mean(k: *const TkKalman, out: *mut f64) -> TkStatus {
    guarded(|| {
        nonnull!(k);
        nonnull!(out);
        let k = unsafe { &*k };
        for i in 0..8 {
            unsafe { *out.add(i) = k.state.mean[i] };
        }
        Ok(())
    })
}

/// Frees a filter handle. A null handle is a no-op.
#[no_mangle]
pub extern "C" fn tk_kalman_free(k: *mut TkKalman) {
    if !k.is_null() {
        drop(unsafe { Box::from_raw(k) });
    }
}

/// Runs drift detection over a trajectory of `len` boxes. `frames` supplies
/// the frame index of each box and may be null, in which case positions
/// `0..len` are used. When `flagged` is non-null it receives one byte per
/// box, 1 where the gating distance exceeded `gate_threshold`. `max_gate`
/// and `drifted` are optional scalar outputs.
///
/// # Safety
/// `boxes` must be valid for `len` boxes, `frames` for `len` indices when
/// non-null, `flagged` for `len` bytes when non-null.
#[no_mangle]
pub unsafe extern "C" fn tk_drift_check(
    frames: *const u64,
    boxes: *const TkBox,
    len: usize,
    gate_threshold: f64,
    flagged: *mut u8,
    max_gate: *mut f64,
    drifted: *mut u8,
) -> TkStatus {
    guarded(|| {
        nonnull!(boxes);
        let raw = unsafe { std::slice::from_raw_parts(boxes, len) };
        let mut track = Vec::with_capacity(len);
        for (i, b) in raw.iter().enumerate() {
            let frame =
                if frames.is_null() { i as u64 } else { unsafe { *frames.add(i) } };
            track.push((frame, b.validate()?));
        }
        let report =
            kalman::drift_check(&track, gate_threshold).map_err(TkStatus::from)?;
        if !flagged.is_null() {
            for (i, (frame, _)) in track.iter().enumerate() {
                let hit = report.flagged_frames.contains(frame);
                unsafe { *flagged.add(i) = hit as u8 };
            }
        }
        if !max_gate.is_null() {
            unsafe { *max_gate = report.max_gate_distance };
        }
        if !drifted.is_null() {
            unsafe { *drifted = report.drifted as u8 };
        }
        Ok(())
    })
}

/// Default gating threshold for `tk_drift_check`.
#[no_mangle]
pub extern "C" fn tk_default_gate_threshold() -> f64 {
    kalman::DEFAULT_GATE_THRESHOLD
}

// ---------------------------------------------------------------------------
// Clip scheduling and frame sampling
// ---------------------------------------------------------------------------

/// Computes the clip schedule for a `frame_count`-frame video: one clip when
/// the video is short enough, otherwise fixed-length clips overlapping by one
/// frame. Writes up to `cap` clips to `out` and the total to `count`; a null
/// `out` only counts.
///
/// # Safety
/// `out` must be valid for `cap` clips and `count` for one `size_t` when
/// non-null.
#[no_mangle]
pub unsafe extern "C" fn tk_schedule_clips(
    frame_count: u64,
    out: *mut TkClip,
    cap: usize,
    count: *mut usize,
) -> TkStatus {
    guarded(|| {
        let clips: Vec<TkClip> = harness::schedule_clips(frame_count)
            .map_err(TkStatus::from)?
            .into_iter()
            .map(|(start, end)| TkClip { start, end })
            .collect();
        write_slice(&clips, out, cap, count)
    })
}

/// Picks up to `n` distinct frame indices spread uniformly over the video.
/// Writes up to `cap` indices to `out` and the total to `count`; a null `out`
/// only counts.
///
/// # Safety
/// `out` must be valid for `cap` indices and `count` for one `size_t` when
/// non-null.
#[no_mangle]
pub unsafe extern "C" fn tk_uniform_sample(
    frame_count: u64,
    n: usize,
    out: *mut u64,
    cap: usize,
    count: *mut usize,
) -> TkStatus {
    guarded(|| {
        let picks = harness::uniform_sample(frame_count, n).map_err(TkStatus::from)?;
        write_slice(&picks, out, cap, count)
    })
}

// ---------------------------------------------------------------------------
// Tracking metrics
// ---------------------------------------------------------------------------

fn paired_track(
    gt: *const TkBox,
    pred: *const TkBox,
    len: usize,
) -> Result<(Vec<(u64, BoundingBox)>, Vec<(u64, BoundingBox)>), TkStatus> {
    if gt.is_null() || pred.is_null() {
        return Err(TkStatus::NullPointer);
    }
    let gt = unsafe { std::slice::from_raw_parts(gt, len) };
    let pred = unsafe { std::slice::from_raw_parts(pred, len) };
    let convert = |boxes: &[TkBox]| -> Result<Vec<(u64, BoundingBox)>, TkStatus> {
        boxes
            .iter()
            .enumerate()
            .map(|(i, b)| Ok((i as u64, b.validate()?)))
            .collect()
    };
    Ok((convert(gt)?, convert(pred)?))
}

/// Area under the overlap success curve for `len` aligned box pairs.
///
/// # Safety
/// `gt` and `pred` must be valid for `len` boxes; `out` for one `double`.
#[no_mangle]
pub unsafe extern "C" fn tk_success_auc(
    gt: *const TkBox,
    pred: *const TkBox,
    len: usize,
    out: *mut f64,
) -> TkStatus {
    guarded(|| {
        nonnull!(out);
        let (gt, pred) = paired_track(gt, pred, len)?;
        let curve = metrics::success_curve(&gt, &pred).map_err(TkStatus::from)?;
        unsafe { *out = curve.auc };
        Ok(())
    })
}

/// Fraction of frames whose center error is within 20 pixels on a
/// `frame_w x frame_h` image.
///
/// # Safety
/// `gt` and `pred` must be valid for `len` boxes; `out` for one `double`.
#[no_mangle]
pub unsafe extern "C" fn tk_precision(
    gt: *const TkBox,
    pred: *const TkBox,
    len: usize,
    frame_w: f64,
    frame_h: f64,
    out: *mut f64,
) -> TkStatus {
    guarded(|| {
        nonnull!(out);
        let (gt, pred) = paired_track(gt, pred, len)?;
        let curve =
            metrics::precision_curve(&gt, &pred, frame_w, frame_h).map_err(TkStatus::from)?;
        unsafe { *out = curve.value_at(metrics::PRECISION_PIXELS) };
        Ok(())
    })
}

/// Fraction of frames whose box-normalized center error is within the
/// standard threshold.
///
/// # Safety
/// `gt` and `pred` must be valid for `len` boxes; `out` for one `double`.
#[no_mangle]
pub unsafe extern "C" fn tk_norm_precision(
    gt: *const TkBox,
    pred: *const TkBox,
    len: usize,
    out: *mut f64,
) -> TkStatus {
    guarded(|| {
        nonnull!(out);
        let (gt, pred) = paired_track(gt, pred, len)?;
        let p = metrics::norm_precision(&gt, &pred, metrics::NORM_PRECISION_THRESHOLD)
            .map_err(TkStatus::from)?;
        unsafe { *out = p };
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// Text metrics
// ---------------------------------------------------------------------------

/// Alignment-based caption score of `candidate` against `n_refs` references
/// (best reference wins), written to `out`.
///
/// # Safety
/// All strings must be NUL-terminated; `refs` must be valid for `n_refs`
/// pointers; `out` for one `double`.
#[no_mangle]
pub unsafe extern "C" fn tk_meteor(
    candidate: *const c_char,
    refs: *const *const c_char,
    n_refs: usize,
    out: *mut f64,
) -> TkStatus {
    guarded(|| {
        nonnull!(out);
        nonnull!(refs);
        let candidate = unsafe { read_str(candidate) }?;
        let refs = unsafe { std::slice::from_raw_parts(refs, n_refs) };
        let refs: Vec<String> = refs
            .iter()
            .map(|&r| unsafe { read_str(r) }.map(str::to_string))
            .collect::<Result<_, _>>()?;
        let score = text_metrics::meteor_lite(candidate, &refs).map_err(TkStatus::from)?;
        unsafe { *out = score };
        Ok(())
    })
}

/// Corpus-level consensus caption score. `candidates` holds `n_items`
/// strings; `refs` holds their reference strings back to back, `ref_counts[i]`
/// of them per item. The mean score is written to `out`.
///
/// # Safety
/// All strings must be NUL-terminated; `refs` must be valid for the sum of
/// `ref_counts`; `out` for one `double`.
#[no_mangle]
pub unsafe extern "C" fn tk_cider(
    candidates: *const *const c_char,
    n_items: usize,
    refs: *const *const c_char,
    ref_counts: *const usize,
    out: *mut f64,
) -> TkStatus {
    guarded(|| {
        nonnull!(out);
        nonnull!(candidates);
        nonnull!(refs);
        nonnull!(ref_counts);
        let candidates = unsafe { std::slice::from_raw_parts(candidates, n_items) };
        let candidates: Vec<String> = candidates
            .iter()
            .map(|&c| unsafe { read_str(c) }.map(str::to_string))
            .collect::<Result<_, _>>()?;
        let counts = unsafe { std::slice::from_raw_parts(ref_counts, n_items) };
        let total: usize = counts.iter().sum();
        let flat = unsafe { std::slice::from_raw_parts(refs, total) };
        let mut references = Vec::with_capacity(n_items);
        let mut offset = 0;
        for &count in counts {
            let group: Vec<String> = flat[offset..offset + count]
                .iter()
                .map(|&r| unsafe { read_str(r) }.map(str::to_string))
                .collect::<Result<_, _>>()?;
            references.push(group);
            offset += count;
        }
        let score = text_metrics::cider(&candidates, &references).map_err(TkStatus::from)?;
        unsafe { *out = score };
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// Token selector
// ---------------------------------------------------------------------------

/// Opaque token-selector parameter container.
pub struct TkSelector {
    params: SelectorParams,
}

/// Creates a selector with reproducible random parameters: `c`-dim token
/// features, a `gate_hidden`-unit scoring gate, `d`-dim projected outputs,
/// `k` kept tokens, and optional score weighting. Release the handle with
/// `tk_selector_free`.
///
/// # Safety
/// `out` must be valid for one pointer.
#[no_mangle]
pub unsafe extern "C" fn tk_selector_new(
    c: usize,
    gate_hidden: usize,
    d: usize,
    k: usize,
    score_weighting: u8,
    seed: u64,
    out: *mut *mut TkSelector,
) -> TkStatus {
    guarded(|| {
        nonnull!(out);
        if c == 0 || gate_hidden == 0 || d == 0 || k == 0 {
            return Err(TkStatus::InvalidArgument);
        }
        let params = SelectorParams::random(c, gate_hidden, d, k, score_weighting != 0, seed);
        unsafe { *out = Box::into_raw(Box::new(TkSelector { params })) };
        Ok(())
    })
}

/// Token feature dimension the selector expects, written to `out`.
///
/// # Safety
/// `sel` must be a live handle; `out` must be valid for one `size_t`.
#[no_mangle]
pub unsafe extern "C" fn tk_selector_input_dim(
    sel: *const TkSelector,
    out: *mut usize,
) -> TkStatus {
    guarded(|| {
        nonnull!(sel);
        nonnull!(out);
        unsafe { *out = (*sel).params.input_dim() };
        Ok(())
    })
}

/// Number of tokens the selector keeps, written to `out`.
///
/// # Safety
/// `sel` must be a live handle; `out` must be valid for one `size_t`.
#[no_mangle]
pub unsafe extern "C" fn tk_selector_k(sel: *const TkSelector, out: *mut usize) -> TkStatus {
    guarded(|| {
        nonnull!(sel);
        nonnull!(out);
        unsafe { *out = (*sel).params.k };
        Ok(())
    })
}

/// Output feature dimension of the selector's projection, written to `out`.
///
/// # Safety
/// `sel` must be a live handle; `out` must be valid for one `size_t`.
#[no_mangle]
pub unsafe extern "C" fn tk_selector_output_dim(
    sel: *const TkSelector,
    out: *mut usize,
) -> TkStatus {
    guarded(|| {
        nonnull!(sel);
        nonnull!(out);
        unsafe { *out = (*sel).params.proj.output_dim() };
        Ok(())
    })
}

/// Runs the selector on `n` tokens of feature dimension `input_dim`, laid out
/// row-major in `tokens`. When non-null, `indices` receives the `k` kept
/// token positions in ascending order and `output` the `k x output_dim`
/// projected features, row-major.
///
/// # Safety
/// `sel` must be a live handle; `tokens` must be valid for `n * input_dim`
/// doubles; `indices` for `k` `size_t`s and `output` for `k * output_dim`
/// doubles when non-null.
#[no_mangle]
pub unsafe extern "C" fn tk_selector_forward(
    sel: *const TkSelector,
    tokens: *const f64,
    n: usize,
    indices: *mut usize,
    output: *mut f64,
) -> TkStatus {
    guarded(|| {
        nonnull!(sel);
        nonnull!(tokens);
        let params = &unsafe { &*sel }.params;
        let c = params.input_dim();
        let raw = unsafe { std::slice::from_raw_parts(tokens, n * c) };
        let tokens = ndarray::Array2::from_shape_vec((n, c), raw.to_vec())
            .map_err(|_| TkStatus::InvalidArgument)?;
        let result = tselector::forward(&tokens, params).map_err(TkStatus::from)?;
        if !indices.is_null() {
            unsafe {
                std::ptr::copy_nonoverlapping(result.indices.as_ptr(), indices, params.k)
            };
        }
        if !output.is_null() {
            for (i, v) in result.output.iter().enumerate() {
                unsafe { *output.add(i) = *v };
            }
        }
        Ok(())
    })
}

/// Frees a selector handle. A null handle is a no-op.
#[no_mangle]
pub extern "C" fn tk_selector_free(sel: *mut TkSelector) {
    if !sel.is_null() {
        drop(unsafe { Box::from_raw(sel) });
    }
}
