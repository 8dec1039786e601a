/* C interface of the lidkit eyelid-angle blink analysis library. */

#ifndef LIDKIT_H
#define LIDKIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Call outcome; 0 is success.
 */
typedef enum LidkitStatus {
  LidkitStatus_Ok = 0,
  LidkitStatus_NullPointer = 1,
  LidkitStatus_InvalidArgument = 2,
  LidkitStatus_DegenerateGeometry = 3,
  LidkitStatus_InsufficientData = 4,
  LidkitStatus_BufferTooSmall = 5,
  LidkitStatus_Internal = 6,
} LidkitStatus;

/**
 * Opaque list of detected blinks.
 */
typedef struct LidkitBlinkList LidkitBlinkList;

/**
 * Opaque uniformly sampled ELA series.
 */
typedef struct LidkitSeries LidkitSeries;

/**
 * One detected blink; indices refer to the analyzed series.
 */
typedef struct LidkitBlink {
  uintptr_t i_start;
  uintptr_t i_end;
  uintptr_t m1_index;
  uintptr_t m2_index;
  /**
   * Maximum descent rate, degrees/second (negative).
   */
  double m1;
  /**
   * Maximum ascent rate, degrees/second (positive).
   */
  double m2;
  double ela_start;
  double ela_end;
  double ela_min;
} LidkitBlink;

/**
 * The per-blink feature record. `previous_time` is meaningful only when
 * `has_previous_time` is true.
 */
typedef struct LidkitBlinkFeatures {
  double t1;
  double t2;
  double t3;
  double t4;
  double closing_d1;
  double closed_d2;
  double reopening_d3;
  bool has_previous_time;
  double previous_time;
  double amplitude;
  double av_ratio;
  double normal_area;
  double perclos;
  double peropening;
} LidkitBlinkFeatures;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buffer` (truncated,
 * always NUL-terminated) and returns the full message length in bytes,
 * excluding the terminator. A zero-capacity buffer is allowed.
 *
 * # Safety
 * `buffer` must hold `capacity` writable bytes, or be NULL.
 */
uintptr_t lidkit_last_error_message(char *buffer, uintptr_t capacity);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lidkit_version(void);

/**
 * Eyelid angle in degrees between the least-squares planes of the upper
 * and lower lid point sets (`x,y,z` triples, `*_count` points each,
 * ordered inner corner to outer corner).
 *
 * # Safety
 * `upper_xyz` and `lower_xyz` must point to `3 * *_count` readable f64
 * values; `out_degrees` must be writable.
 */
enum LidkitStatus lidkit_eyelid_angle(const double *upper_xyz,
                                      uintptr_t upper_count,
                                      const double *lower_xyz,
                                      uintptr_t lower_count,
                                      double *out_degrees);

/**
 * Visibility-weighted combination of the per-eye angles. Eyes are marked
 * absent with `has_left` / `has_right` = false; both absent is an error.
 *
 * # Safety
 * `out_degrees` must be writable.
 */
enum LidkitStatus lidkit_combine_ela(bool has_left,
                                     double left_degrees,
                                     bool has_right,
                                     double right_degrees,
                                     double yaw_radians,
                                     double *out_degrees);

/**
 * Eye aspect ratio of six 2D points (`x,y` pairs, 12 values): outer
 * corner, two upper-lid points, inner corner, two lower-lid points.
 *
 * # Safety
 * `points_xy` must point to 12 readable f64 values; `out_ratio` must be
 * writable.
 */
enum LidkitStatus lidkit_ear(const double *points_xy, double *out_ratio);

/**
 * Creates a series from `len` samples at `fps` starting at `start_time`.
 * Returns NULL on invalid arguments.
 *
 * # Safety
 * `values` must point to `len` readable f64 values.
 */
struct LidkitSeries *lidkit_series_new(const double *values,
                                       uintptr_t len,
                                       double fps,
                                       double start_time);

/**
 * Releases a series handle; NULL is a no-op.
 *
 * # Safety
 * `series` must come from [`lidkit_series_new`] and not be used afterwards.
 */
void lidkit_series_free(struct LidkitSeries *series);

/**
 * Number of samples in the series; 0 for NULL.
 *
 * # Safety
 * `series` must be a live series handle or NULL.
 */
uintptr_t lidkit_series_len(const struct LidkitSeries *series);

/**
 * Applies the frame-rate-proportional Gaussian smoothing (sigma = fps/30
 * samples) in place.
 *
 * # Safety
 * `series` must be a live series handle.
 */
enum LidkitStatus lidkit_series_smooth(struct LidkitSeries *series);

/**
 * Copies the series values into `buffer`.
 *
 * # Safety
 * `series` must be a live handle; `buffer` must hold `capacity` writable
 * f64 values.
 */
enum LidkitStatus lidkit_series_values(const struct LidkitSeries *series,
                                       double *buffer,
                                       uintptr_t capacity);

/**
 * Runs blink detection on a smoothed series. Always returns a list handle
 * (possibly empty); NULL only for a NULL series.
 *
 * # Safety
 * `series` must be a live series handle.
 */
struct LidkitBlinkList *lidkit_detect_blinks(const struct LidkitSeries *series, uint64_t seed);

/**
 * Releases a blink list; NULL is a no-op.
 *
 * # Safety
 * `list` must come from [`lidkit_detect_blinks`] and not be used afterwards.
 */
void lidkit_blink_list_free(struct LidkitBlinkList *list);

/**
 * Number of blinks in the list; 0 for NULL.
 *
 * # Safety
 * `list` must be a live blink list handle or NULL.
 */
uintptr_t lidkit_blink_list_len(const struct LidkitBlinkList *list);

/**
 * Copies blink `index` into `out`.
 *
 * # Safety
 * `list` must be a live blink list handle and `out` writable.
 */
enum LidkitStatus lidkit_blink_list_get(const struct LidkitBlinkList *list,
                                        uintptr_t index,
                                        struct LidkitBlink *out);

/**
 * Computes features for every non-degenerate blink of the list against
 * the (smoothed) series the blinks were detected on, chaining the
 * previous-blink context. Writes up to `capacity` records and stores the
 * number written in `out_written`; degenerate blinks are skipped.
 *
 * # Safety
 * `series` and `blinks` must be live handles; `out` must hold `capacity`
 * writable records; `out_written` must be writable.
 */
enum LidkitStatus lidkit_compute_features(const struct LidkitSeries *series,
                                          const struct LidkitBlinkList *blinks,
                                          double perclos_threshold_degrees,
                                          struct LidkitBlinkFeatures *out,
                                          uintptr_t capacity,
                                          uintptr_t *out_written);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIDKIT_H */
