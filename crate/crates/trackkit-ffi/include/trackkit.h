#ifndef TRACKKIT_H
#define TRACKKIT_H

/* Generated by cbindgen from the trackkit-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call in this API.
 */
typedef enum TkStatus {
  /**
   * The call succeeded.
   */
  TK_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  TK_STATUS_NULL_POINTER = 1,
  /**
   * An argument failed validation (bad box corners, zero counts,
   * mismatched dimensions, out-of-range coordinates).
   */
  TK_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The input sequence has too few elements for the operation.
   */
  TK_STATUS_TOO_SHORT = 3,
  /**
   * The output buffer capacity is smaller than the result; counts are
   * still reported so the caller can retry with a larger buffer.
   */
  TK_STATUS_BUFFER_TOO_SMALL = 4,
  /**
   * A string argument was not valid UTF-8.
   */
  TK_STATUS_INVALID_UTF8 = 5,
  /**
   * A covariance factorization failed.
   */
  TK_STATUS_SINGULAR_COVARIANCE = 6,
  /**
   * An unexpected internal failure (including a caught panic).
   */
  TK_STATUS_INTERNAL = 7,
} TkStatus;

/**
 * Opaque constant-velocity filter state over `(cx, cy, a, h)` and its
 * velocities.
 */
typedef struct TkKalman TkKalman;

/**
 * Opaque token-selector parameter container.
 */
typedef struct TkSelector TkSelector;

/**
 * An axis-aligned box in normalized `[0, 1]` image coordinates.
 */
typedef struct TkBox {
  double x1;
  double y1;
  double x2;
  double y2;
} TkBox;

/**
 * A box quantized to integer bins in `[0, 99]`.
 */
typedef struct TkQuantBox {
  uint8_t x1;
  uint8_t y1;
  uint8_t x2;
  uint8_t y2;
} TkQuantBox;

/**
 * A half-open frame range `[start, end)` scheduled as one tracking clip.
 */
typedef struct TkClip {
  uint64_t start;
  uint64_t end;
} TkClip;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static, NUL-terminated name of a status code.
 */
const char *tk_status_name(enum TkStatus status);

/**
 * Static, NUL-terminated library version string.
 */
const char *tk_version(void);

/**
 * Intersection-over-union of two boxes, written to `out`.
 *
 * # Safety
 * `out` must be valid for one `double`.
 */
enum TkStatus tk_iou(struct TkBox a, struct TkBox b, double *out);

/**
 * Center distance in pixels between two boxes on a `frame_w x frame_h` image.
 *
 * # Safety
 * `out` must be valid for one `double`.
 */
enum TkStatus tk_center_error(struct TkBox gt,
                              struct TkBox pred,
                              double frame_w,
                              double frame_h,
                              double *out);

/**
 * Center distance normalized by the ground-truth box dimensions.
 *
 * # Safety
 * `out` must be valid for one `double`.
 */
enum TkStatus tk_norm_center_error(struct TkBox gt, struct TkBox pred, double *out);

/**
 * Quantizes a normalized box to integer bins.
 *
 * # Safety
 * `out` must be valid for one `TkQuantBox`.
 */
enum TkStatus tk_quantize(struct TkBox b, struct TkQuantBox *out);

/**
 * Maps a quantized box back to the normalized centers of its bins.
 *
 * # Safety
 * `out` must be valid for one `TkBox`.
 */
enum TkStatus tk_dequantize(struct TkQuantBox q, struct TkBox *out);

/**
 * Writes the `[x1,y1,x2,y2]` coordinate text of a quantized box,
 * NUL-terminated, into `buf`. Sixteen bytes are always enough.
 *
 * # Safety
 * `buf` must be valid for `cap` bytes.
 */
enum TkStatus tk_format_coords(struct TkQuantBox q, char *buf, size_t cap);

/**
 * Extracts every well-formed `[x1,y1,x2,y2]` tuple from `text` in order,
 * skipping malformed or out-of-range ones. Writes up to `cap` boxes to `out`
 * and the total number found to `found`; a null `out` only counts.
 *
 * # Safety
 * `text` must be NUL-terminated; `out` must be valid for `cap` boxes and
 * `found` for one `size_t` when non-null.
 */
enum TkStatus tk_parse_coords(const char *text, struct TkQuantBox *out, size_t cap, size_t *found);

/**
 * Creates a filter initialized on a first observed box. The new handle is
 * written to `out` and must be released with `tk_kalman_free`.
 *
 * # Safety
 * `out` must be valid for one pointer.
 */
enum TkStatus tk_kalman_new(struct TkBox b, struct TkKalman **out);

/**
 * Advances the filter one time step in place.
 *
 * # Safety
 * `k` must be a live handle from `tk_kalman_new`.
 */
enum TkStatus tk_kalman_predict(struct TkKalman *k);

/**
 * Folds an observed box into the filter in place.
 *
 * # Safety
 * `k` must be a live handle from `tk_kalman_new`.
 */
enum TkStatus tk_kalman_update(struct TkKalman *k, struct TkBox b);

/**
 * Squared Mahalanobis distance of an observation from the predicted state,
 * written to `out`.
 *
 * # Safety
 * `k` must be a live handle; `out` must be valid for one `double`.
 */
enum TkStatus tk_kalman_gate_distance(const struct TkKalman *k, struct TkBox b, double *out);

/**
 * Copies the eight-dimensional state mean into `out`.
 *
 * # Safety
 * `k` must be a live handle; `out` must be valid for eight `double`s.
 */
enum TkStatus tk_kalman_mean(const struct TkKalman *k, double *out);

/**
 * Frees a filter handle. A null handle is a no-op.
 */
void tk_kalman_free(struct TkKalman *k);

/**
 * Runs drift detection over a trajectory of `len` boxes. `frames` supplies
 * the frame index of each box and may be null, in which case positions
 * `0..len` are used. When `flagged` is non-null it receives one byte per
 * box, 1 where the gating distance exceeded `gate_threshold`. `max_gate`
 * and `drifted` are optional scalar outputs.
 *
 * # Safety
 * `boxes` must be valid for `len` boxes, `frames` for `len` indices when
 * non-null, `flagged` for `len` bytes when non-null.
 */
enum TkStatus tk_drift_check(const uint64_t *frames,
                             const struct TkBox *boxes,
                             size_t len,
                             double gate_threshold,
                             uint8_t *flagged,
                             double *max_gate,
                             uint8_t *drifted);

/**
 * Default gating threshold for `tk_drift_check`.
 */
double tk_default_gate_threshold(void);

/**
 * Computes the clip schedule for a `frame_count`-frame video: one clip when
 * the video is short enough, otherwise fixed-length clips overlapping by one
 * frame. Writes up to `cap` clips to `out` and the total to `count`; a null
 * `out` only counts.
 *
 * # Safety
 * `out` must be valid for `cap` clips and `count` for one `size_t` when
 * non-null.
 */
enum TkStatus tk_schedule_clips(uint64_t frame_count,
                                struct TkClip *out,
                                size_t cap,
                                size_t *count);

/**
 * Picks up to `n` distinct frame indices spread uniformly over the video.
 * Writes up to `cap` indices to `out` and the total to `count`; a null `out`
 * only counts.
 *
 * # Safety
 * `out` must be valid for `cap` indices and `count` for one `size_t` when
 * non-null.
 */
enum TkStatus tk_uniform_sample(uint64_t frame_count,
                                size_t n,
                                uint64_t *out,
                                size_t cap,
                                size_t *count);

/**
 * Area under the overlap success curve for `len` aligned box pairs.
 *
 * # Safety
 * `gt` and `pred` must be valid for `len` boxes; `out` for one `double`.
 */
enum TkStatus tk_success_auc(const struct TkBox *gt,
                             const struct TkBox *pred,
                             size_t len,
                             double *out);

/**
 * Fraction of frames whose center error is within 20 pixels on a
 * `frame_w x frame_h` image.
 *
 * # Safety
 * `gt` and `pred` must be valid for `len` boxes; `out` for one `double`.
 */
enum TkStatus tk_precision(const struct TkBox *gt,
                           const struct TkBox *pred,
                           size_t len,
                           double frame_w,
                           double frame_h,
                           double *out);

/**
 * Fraction of frames whose box-normalized center error is within the
 * standard threshold.
 *
 * # Safety
 * `gt` and `pred` must be valid for `len` boxes; `out` for one `double`.
 */
enum TkStatus tk_norm_precision(const struct TkBox *gt,
                                const struct TkBox *pred,
                                size_t len,
                                double *out);

/**
 * Alignment-based caption score of `candidate` against `n_refs` references
 * (best reference wins), written to `out`.
 *
 * # Safety
 * All strings must be NUL-terminated; `refs` must be valid for `n_refs`
 * pointers; `out` for one `double`.
 */
enum TkStatus tk_meteor(const char *candidate, const char *const *refs, size_t n_refs, double *out);

/**
 * Corpus-level consensus caption score. `candidates` holds `n_items`
 * strings; `refs` holds their reference strings back to back, `ref_counts[i]`
 * of them per item. The mean score is written to `out`.
 *
 * # Safety
 * All strings must be NUL-terminated; `refs` must be valid for the sum of
 * `ref_counts`; `out` for one `double`.
 */
enum TkStatus tk_cider(const char *const *candidates,
                       size_t n_items,
                       const char *const *refs,
                       const size_t *ref_counts,
                       double *out);

/**
 * Creates a selector with reproducible random parameters: `c`-dim token
 * features, a `gate_hidden`-unit scoring gate, `d`-dim projected outputs,
 * `k` kept tokens, and optional score weighting. Release the handle with
 * `tk_selector_free`.
 *
 * # Safety
 * `out` must be valid for one pointer.
 */
enum TkStatus tk_selector_new(size_t c,
                              size_t gate_hidden,
                              size_t d,
                              size_t k,
                              uint8_t score_weighting,
                              uint64_t seed,
                              struct TkSelector **out);

/**
 * Token feature dimension the selector expects, written to `out`.
 *
 * # Safety
 * `sel` must be a live handle; `out` must be valid for one `size_t`.
 */
enum TkStatus tk_selector_input_dim(const struct TkSelector *sel, size_t *out);

/**
 * Number of tokens the selector keeps, written to `out`.
 *
 * # Safety
 * `sel` must be a live handle; `out` must be valid for one `size_t`.
 */
enum TkStatus tk_selector_k(const struct TkSelector *sel, size_t *out);

/**
 * Output feature dimension of the selector's projection, written to `out`.
 *
 * # Safety
 * `sel` must be a live handle; `out` must be valid for one `size_t`.
 */
enum TkStatus tk_selector_output_dim(const struct TkSelector *sel, size_t *out);

/**
 * Runs the selector on `n` tokens of feature dimension `input_dim`, laid out
 * row-major in `tokens`. When non-null, `indices` receives the `k` kept
 * token positions in ascending order and `output` the `k x output_dim`
 * projected features, row-major.
 *
 * # Safety
 * `sel` must be a live handle; `tokens` must be valid for `n * input_dim`
 * doubles; `indices` for `k` `size_t`s and `output` for `k * output_dim`
 * doubles when non-null.
 */
enum TkStatus tk_selector_forward(const struct TkSelector *sel,
                                  const double *tokens,
                                  size_t n,
                                  size_t *indices,
                                  double *output);

/**
 * Frees a selector handle. A null handle is a no-op.
 */
void tk_selector_free(struct TkSelector *sel);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRACKKIT_H */
