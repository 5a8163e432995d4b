#ifndef OAMLENS_H
#define OAMLENS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call in this ABI.
 */
typedef enum OamStatus {
  Ok = 0,
  /**
   * A required pointer argument was null.
   */
  NullArgument = 1,
  /**
   * Input rejected by domain or configuration validation.
   */
  InvalidArgument = 2,
  /**
   * Geometrically impossible request (angle past asymptote, ray off
   * aperture, undefined beamwidth).
   */
  Geometry = 3,
  /**
   * Curve fitting failed or the samples were unusable.
   */
  Fit = 4,
  Internal = 5,
} OamStatus;

/**
 * Model form selector for `oam_fits_coefficients`.
 */
typedef enum OamModelForm {
  /**
   * theta = a * R^b
   */
  PowerLaw = 0,
  /**
   * theta = p / (R + q)
   */
  Rational = 1,
} OamModelForm;

/**
 * Opaque fitted-models handle (both model forms for every mode).
 */
typedef struct OamFits OamFits;

/**
 * Opaque divergence table handle.
 */
typedef struct OamTable OamTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (truncated,
 * always NUL terminated). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must point to `len` writable bytes, or be null with `len` 0.
 */
size_t oam_last_error_message(char *buf, size_t len);

/**
 * Returns the embedded simulation table. Never fails.
 */
struct OamTable *oam_table_builtin(void);

/**
 * Parses a divergence table from CSV text
 * (`R_mm,theta1_deg,theta2_deg,theta3_deg,theta4_deg`).
 *
 * # Safety
 * `csv` must be a NUL-terminated string; `out` must be writable.
 */
enum OamStatus oam_table_from_csv(const char *csv, struct OamTable **out);

/**
 * # Safety
 * `table` must come from this ABI and not be freed twice.
 */
void oam_table_free(struct OamTable *table);

/**
 * Fits both divergence models to every mode of the table.
 *
 * # Safety
 * `table` must be a live handle; `out` must be writable.
 */
enum OamStatus oam_fit_models(const struct OamTable *table, struct OamFits **out);

/**
 * # Safety
 * `fits` must come from this ABI and not be freed twice.
 */
void oam_fits_free(struct OamFits *fits);

/**
 * Reads the fitted coefficient pair and RMS residual (degrees) of one
 * mode. `params` receives 2 values.
 *
 * # Safety
 * `fits` must be a live handle; `params` must point to 2 writable
 * doubles; `rms_deg` must be writable or null.
 */
enum OamStatus oam_fits_coefficients(const struct OamFits *fits,
                                     int32_t mode_l,
                                     enum OamModelForm form,
                                     double *params,
                                     double *rms_deg);

/**
 * Divergence angle (degrees) predicted by the fitted power model.
 *
 * # Safety
 * `fits` must be a live handle; `theta_deg` must be writable.
 */
enum OamStatus oam_divergence_angle(const struct OamFits *fits,
                                    int32_t mode_l,
                                    double r_mm,
                                    double *theta_deg);

/**
 * Normalized far-field gain pattern of the mode at polar angle
 * `theta_rad`, in [0, 1].
 *
 * # Safety
 * `gain` must be writable.
 */
enum OamStatus oam_pattern_gain(uint32_t n_elements,
                                double radius_m,
                                double frequency_hz,
                                int32_t mode_l,
                                double theta_rad,
                                double *gain);

/**
 * Asymptotic feed angle arccos(1/n), radians.
 *
 * # Safety
 * `mu_max_rad` must be writable.
 */
enum OamStatus oam_max_feed_angle(double n, double *mu_max_rad);

/**
 * Lens thickness (m) seen by a ray at feed angle `theta_rad`.
 *
 * # Safety
 * `thickness_m` must be writable.
 */
enum OamStatus oam_lens_thickness(double n,
                                  double focal_m,
                                  double diameter_m,
                                  double theta_rad,
                                  double *thickness_m);

/**
 * Samples the single-focal refracting surface at `count` equally spaced
 * radial stations; writes axial sag into `x_m` and radius into `y_m`.
 *
 * # Safety
 * `x_m` and `y_m` must each point to `count` writable doubles.
 */
enum OamStatus oam_lens_profile(double n,
                                double focal_m,
                                double diameter_m,
                                size_t count,
                                double *x_m,
                                double *y_m);

/**
 * Internal focal distance (m) of the bifocal lens preserving the
 * `theta_1_rad` wavefront with wavelength multiple `m_int`.
 *
 * # Safety
 * `f_i_m` must be writable.
 */
enum OamStatus oam_internal_focal(double f_e_m,
                                  double theta_1_rad,
                                  double lambda_m,
                                  uint32_t m_int,
                                  double *f_i_m);

/**
 * Residual divergence tau (rad) of a ray from the external focus
 * crossing the internal region.
 *
 * # Safety
 * `tau_rad` must be writable.
 */
enum OamStatus oam_residual_divergence(double theta_l_rad,
                                       double theta_l_fi_rad,
                                       double n,
                                       double *tau_rad);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OAMLENS_H */
