/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef FEATFRONT_H
#define FEATFRONT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define FF_DETECTOR_FAST 0

#define FF_DETECTOR_FAST_BATCH 1

#define FF_DETECTOR_HARRIS 2

#define FF_DETECTOR_HARRIS_FIXED 3

typedef enum FfStatus {
  FF_STATUS_OK = 0,
  FF_STATUS_NULL_POINTER = 1,
  FF_STATUS_INVALID_ARGUMENT = 2,
  FF_STATUS_IO = 3,
  FF_STATUS_DECODE = 4,
  FF_STATUS_DETECTOR = 5,
  FF_STATUS_METRIC = 6,
  FF_STATUS_OUT_OF_RANGE = 7,
  FF_STATUS_PANIC = 8,
} FfStatus;

// Opaque list of detected corners, sorted as the detector returns them.
typedef struct FfCornerList FfCornerList;

// Opaque 8-bit grayscale image.
typedef struct FfImage FfImage;

// Detector choice (one of the `FF_DETECTOR_*` values) and the parameters of
// every tier. Start from [`ff_detector_config_default`].
typedef struct FfDetectorConfig {
  uint32_t detector;
  uint8_t fast_arc_length;
  uint8_t fast_threshold;
  uint32_t fast_nms_window;
  uint32_t lanes;
  double harris_k;
  double harris_response_threshold;
  uint32_t harris_sobel_size;
  uint32_t harris_block_size;
  uint32_t harris_nms_window;
  uint32_t fixed_integer_bits;
  uint32_t fixed_fraction_bits;
  uint32_t fixed_accumulator_bits;
} FfDetectorConfig;

typedef struct FfCorner {
  uint32_t x;
  uint32_t y;
  double score;
  // Pyramid level; coordinates are level-local.
  uint32_t level;
} FfCorner;

typedef struct FfAgreement {
  size_t matched;
  size_t reference_count;
  size_t candidate_count;
  double precision;
  double recall;
  double mean_offset;
} FfAgreement;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *ff_version(void);

// Static name of a status code, e.g. `"invalid_argument"`.
const char *ff_status_name(enum FfStatus status);

// Message of the last failing call on this thread, or NULL if none. The
// pointer stays valid until the next failing call on the same thread.
const char *ff_last_error_message(void);

// Copies a `width` x `height` image whose rows start `stride` bytes apart.
//
// # Safety
// `data` must point to at least `stride * (height - 1) + width` readable bytes.
enum FfStatus ff_image_from_buffer(const uint8_t *data,
                                   size_t width,
                                   size_t height,
                                   size_t stride,
                                   struct FfImage **out);

// Loads a binary (P5) 8-bit PGM file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum FfStatus ff_image_load_pgm(const char *path, struct FfImage **out);

// Width in pixels, 0 for NULL.
//
// # Safety
// `img` must be NULL or a live handle.
size_t ff_image_width(const struct FfImage *img);

// Height in pixels, 0 for NULL.
//
// # Safety
// `img` must be NULL or a live handle.
size_t ff_image_height(const struct FfImage *img);

// Releases an image; NULL is ignored.
//
// # Safety
// `img` must be NULL or a handle not yet freed.
void ff_image_free(struct FfImage *img);

// Default parameters for one of the `FF_DETECTOR_*` detectors. An unknown
// code yields the FAST defaults with `detector` left as given, which
// `ff_detect` then rejects.
struct FfDetectorConfig ff_detector_config_default(uint32_t detector);

// Runs a detector at full resolution. `config` may be NULL for FAST-9 defaults.
//
// # Safety
// `img` must be a live handle, `config` NULL or valid, `out` writable.
enum FfStatus ff_detect(const struct FfImage *img,
                        const struct FfDetectorConfig *config,
                        struct FfCornerList **out);

// Number of corners, 0 for NULL.
//
// # Safety
// `list` must be NULL or a live handle.
size_t ff_corner_list_len(const struct FfCornerList *list);

// Pointer to the contiguous corner array (valid while the list lives), or
// NULL for an empty or NULL list.
//
// # Safety
// `list` must be NULL or a live handle.
const struct FfCorner *ff_corner_list_data(const struct FfCornerList *list);

// Copies corner `index` into `out`.
//
// # Safety
// `list` must be a live handle and `out` writable.
enum FfStatus ff_corner_list_get(const struct FfCornerList *list,
                                 size_t index,
                                 struct FfCorner *out);

// Releases a corner list; NULL is ignored.
//
// # Safety
// `list` must be NULL or a handle not yet freed.
void ff_corner_list_free(struct FfCornerList *list);

// Matches `candidate` against `reference` within `radius` pixels on the same level.
//
// # Safety
// Both lists must be live handles and `out` writable.
enum FfStatus ff_agreement(const struct FfCornerList *reference,
                           const struct FfCornerList *candidate,
                           double radius,
                           struct FfAgreement *out);

// `baseline_ms / candidate_ms`; both must be positive.
//
// # Safety
// `out` must be writable.
enum FfStatus ff_speedup(double baseline_ms, double candidate_ms, double *out);

// Modeled energy in millijoules: watts times milliseconds.
//
// # Safety
// `out` must be writable.
enum FfStatus ff_energy_per_frame(double power_w, double frame_time_ms, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FEATFRONT_H */
