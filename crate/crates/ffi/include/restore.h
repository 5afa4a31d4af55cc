#ifndef RESTORE_H
#define RESTORE_H

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

// Outcome of a call. Zero is success.
typedef enum RestoreStatus {
  RESTORE_STATUS_OK = 0,
  RESTORE_STATUS_NULL_POINTER = 1,
  RESTORE_STATUS_INVALID_ARGUMENT = 2,
  RESTORE_STATUS_DIMENSION_MISMATCH = 3,
  RESTORE_STATUS_DECODE = 4,
  RESTORE_STATUS_UNSUPPORTED = 5,
  RESTORE_STATUS_ENCODE = 6,
  RESTORE_STATUS_IO = 7,
  RESTORE_STATUS_PANIC = 8,
} RestoreStatus;

typedef enum RestoreFormat {
  RESTORE_FORMAT_PNG = 0,
  RESTORE_FORMAT_PGM = 1,
} RestoreFormat;

typedef enum RestoreBlendMode {
  RESTORE_BLEND_MODE_ALPHA = 0,
  RESTORE_BLEND_MODE_MULTIPLY_DARKEN = 1,
  RESTORE_BLEND_MODE_MIN = 2,
} RestoreBlendMode;

typedef enum RestoreNotchAxis {
  RESTORE_NOTCH_AXIS_HORIZONTAL = 0,
  RESTORE_NOTCH_AXIS_VERTICAL = 1,
} RestoreNotchAxis;

// Grayscale image with values in `[0, 1]`, row-major.
typedef struct RestoreRaster RestoreRaster;

// Text-enhancement settings. `auto_threshold` selects Otsu and ignores
// `threshold`.
typedef struct RestoreEnhanceParams {
  bool auto_threshold;
  double threshold;
  size_t radius;
  double edge_gain;
  double mix;
} RestoreEnhanceParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or NULL. Valid until
// the next call into this library from the same thread.
const char *restore_last_error(void);

// Copies `width * height` samples from `data`. Values must lie in `[0, 1]`.
//
// # Safety
// `data` must point to `width * height` readable doubles; `out` must be writable.
enum RestoreStatus restore_raster_new(size_t width,
                                      size_t height,
                                      const double *data,
                                      struct RestoreRaster **out);

// Decodes PNG or binary PGM bytes; the format is sniffed.
//
// # Safety
// `bytes` must point to `len` readable bytes; `out` must be writable.
enum RestoreStatus restore_raster_decode(const uint8_t *bytes,
                                         size_t len,
                                         struct RestoreRaster **out);

// Encodes as 8-bit grayscale. Release the buffer with [`restore_bytes_free`].
//
// # Safety
// `r` must be a live handle; `out_bytes` and `out_len` must be writable.
enum RestoreStatus restore_raster_encode(const struct RestoreRaster *r,
                                         enum RestoreFormat format,
                                         uint8_t **out_bytes,
                                         size_t *out_len);

// # Safety
// `bytes` and `len` must come from one [`restore_raster_encode`] call, or `bytes` is NULL.
void restore_bytes_free(uint8_t *bytes, size_t len);

// # Safety
// `r` must be a handle from this library or NULL, and not used afterwards.
void restore_raster_free(struct RestoreRaster *r);

// Zero for NULL.
//
// # Safety
// `r` must be a live handle or NULL.
size_t restore_raster_width(const struct RestoreRaster *r);

// Zero for NULL.
//
// # Safety
// `r` must be a live handle or NULL.
size_t restore_raster_height(const struct RestoreRaster *r);

// Copies the samples into `out`, which must hold exactly `width * height`.
//
// # Safety
// `r` must be a live handle; `out` must point to `len` writable doubles.
enum RestoreStatus restore_raster_copy_data(const struct RestoreRaster *r, double *out, size_t len);

// 1 where the sample exceeds `t`, else 0.
//
// # Safety
// `src` must be a live handle; `out` must be writable.
enum RestoreStatus restore_threshold_binary(const struct RestoreRaster *src,
                                            double t,
                                            struct RestoreRaster **out);

// Otsu's threshold over a `bins`-bin histogram of `src`.
//
// # Safety
// `src` must be a live handle; `out_t` must be writable.
enum RestoreStatus restore_otsu_threshold(const struct RestoreRaster *src,
                                          size_t bins,
                                          double *out_t);

// Dipole-moment edge strength in `[0, 1]`.
//
// # Safety
// `src` must be a live handle; `out` must be writable.
enum RestoreStatus restore_dipole_edge_map(const struct RestoreRaster *src,
                                           size_t radius,
                                           struct RestoreRaster **out);

// `img * (1 - gain * edges)`; `edges` is typically an edge map.
//
// # Safety
// `img` and `edges` must be live handles; `out` must be writable.
enum RestoreStatus restore_overlay_edges(const struct RestoreRaster *img,
                                         const struct RestoreRaster *edges,
                                         double gain,
                                         struct RestoreRaster **out);

// # Safety
// `a` and `b` must be live handles; `out` must be writable.
enum RestoreStatus restore_blend(const struct RestoreRaster *a,
                                 const struct RestoreRaster *b,
                                 enum RestoreBlendMode mode,
                                 double alpha,
                                 struct RestoreRaster **out);

// `clamp(bias + depth * (img(p) - img(p + (dx, dy))))`.
//
// # Safety
// `src` must be a live handle; `out` must be writable.
enum RestoreStatus restore_bas_relief(const struct RestoreRaster *src,
                                      int32_t dx,
                                      int32_t dy,
                                      double depth,
                                      double bias,
                                      struct RestoreRaster **out);

// The library's default enhancement preset.
struct RestoreEnhanceParams restore_enhance_params_default(void);

// Threshold-plus-edges text enhancement. NULL `params` means defaults.
//
// # Safety
// `src` must be a live handle; `params` must be readable or NULL; `out` must be writable.
enum RestoreStatus restore_enhance_text(const struct RestoreRaster *src,
                                        const struct RestoreEnhanceParams *params,
                                        struct RestoreRaster **out);

// Fourier high-pass. The result has the even-padded size of `src`.
//
// # Safety
// `src` must be a live handle; `out` must be writable.
enum RestoreStatus restore_highpass(const struct RestoreRaster *src,
                                    double cutoff,
                                    double softness,
                                    bool renormalize,
                                    struct RestoreRaster **out);

// Removes periodic lines by zeroing a band along one frequency axis.
//
// # Safety
// `src` must be a live handle; `out` must be writable.
enum RestoreStatus restore_notch(const struct RestoreRaster *src,
                                 enum RestoreNotchAxis axis,
                                 double half_width,
                                 double guard_radius,
                                 bool renormalize,
                                 struct RestoreRaster **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RESTORE_H */
