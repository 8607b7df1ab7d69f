#ifndef GELFREE_H
#define GELFREE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GfStatus {
  GF_STATUS_OK = 0,
  GF_STATUS_NULL_POINTER = 1,
  GF_STATUS_DOMAIN = 2,
  GF_STATUS_MEASURE = 3,
  GF_STATUS_PAST_SINGULARITY = 4,
  GF_STATUS_CONVERGENCE = 5,
  GF_STATUS_ORACLE_INCONSISTENCY = 6,
  GF_STATUS_STALLED = 7,
  GF_STATUS_EXPLOSION_DETECTED = 8,
  GF_STATUS_CONFIG = 9,
  GF_STATUS_IO = 10,
  GF_STATUS_PANIC = 11,
} GfStatus;

typedef struct GfEvaluator GfEvaluator;

typedef struct GfMeasure GfMeasure;

typedef struct GfProfile GfProfile;

typedef struct GfSimulation GfSimulation;

// Transform family values at one `s`.
typedef struct GfTransform {
  double s;
  double l0;
  double l0_prime;
  double l1;
  double l1_prime;
} GfTransform;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len - 1` bytes) and returns the full message length.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t gf_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *gf_version(void);

// Builds a measure from a description such as `"exp:2"` or
// `"atomic:1@0.5,2@0.5"`.
//
// # Safety
// `spec` must be a valid NUL-terminated string; `out` must be writable.
enum GfStatus gf_measure_parse(const char *spec, struct GfMeasure **out);

// # Safety
// `out` must be writable.
enum GfStatus gf_measure_monodisperse(struct GfMeasure **out);

// # Safety
// `out` must be writable.
enum GfStatus gf_measure_exponential(double rate, struct GfMeasure **out);

// Density `(n - 1) c^{n-1} x^{-n}` on `(c, ∞)`.
//
// # Safety
// `out` must be writable.
enum GfStatus gf_measure_power_tail(uint32_t exponent, double cut, struct GfMeasure **out);

// Atomic measure with weights summing to one.
//
// # Safety
// `masses` and `weights` must be valid for `n` reads; `out` must be writable.
enum GfStatus gf_measure_atomic(const double *masses,
                                const double *weights,
                                size_t n,
                                struct GfMeasure **out);

// # Safety
// `measure` must come from a `gf_measure_*` constructor; `out` writable.
enum GfStatus gf_measure_transform(const struct GfMeasure *measure,
                                   double s,
                                   struct GfTransform *out);

// # Safety
// `measure` must be null or a live handle not freed before.
void gf_measure_free(struct GfMeasure *measure);

// Exact solution for the given initial measure (copied) and `k > 0`.
//
// # Safety
// `measure` must be a live handle; `out` must be writable.
enum GfStatus gf_evaluator_new(const struct GfMeasure *measure, double k, struct GfEvaluator **out);

// `L(t, s)` for `t > 0`, `s >= 0`.
//
// # Safety
// `ev` must be a live handle; `out` must be writable.
enum GfStatus gf_evaluator_l(const struct GfEvaluator *ev, double t, double s, double *out);

// `∂_s L(t, 0)`, minus the first moment of `ν(t)`.
//
// # Safety
// `ev` must be a live handle; `out` must be writable.
enum GfStatus gf_evaluator_dl_ds_at_zero(const struct GfEvaluator *ev, double t, double *out);

// Hitting time `T(s)` of the characteristic started at `s`.
//
// # Safety
// `ev` must be a live handle; `out` must be writable.
enum GfStatus gf_evaluator_time_to_axis(const struct GfEvaluator *ev, double s, double *out);

// # Safety
// `ev` must be null or a live handle not freed before.
void gf_evaluator_free(struct GfEvaluator *ev);

// Self-similar profile for `k > 0`; `order` is the Gaver–Stehfest order
// (even, 8 to 18) or 0 for the default.
//
// # Safety
// `out` must be writable.
enum GfStatus gf_profile_new(double k, uint32_t order, struct GfProfile **out);

// # Safety
// `p` must be a live handle; `out` must be writable.
enum GfStatus gf_profile_l_star(const struct GfProfile *p, double s, double *out);

// # Safety
// `p` must be a live handle; `out` must be writable.
enum GfStatus gf_profile_m_star(const struct GfProfile *p, double x, double *out);

// # Safety
// `p` must be null or a live handle not freed before.
void gf_profile_free(struct GfProfile *p);

// Principal branch `W(z)` for `z >= 0`.
//
// # Safety
// `out` must be writable.
enum GfStatus gf_lambert_w(double z, double *out);

// `n`-particle mass-flow system sampled from `measure`.
//
// # Safety
// `measure` must be a live handle; `out` must be writable.
enum GfStatus gf_simulation_new(const struct GfMeasure *measure,
                                size_t n,
                                double k,
                                uint64_t seed,
                                struct GfSimulation **out);

// Advances to `t_end`. `event_cap == 0` keeps the default cap. Returns
// `ExplosionDetected` when the mean mass exceeds 1000 times its initial
// value or the cap is hit; the handle stays usable for inspection.
//
// # Safety
// `sim` must be a live handle.
enum GfStatus gf_simulation_run_until(struct GfSimulation *sim, double t_end, uint64_t event_cap);

// # Safety
// `sim` must be a live handle; `out` must be writable.
enum GfStatus gf_simulation_time(const struct GfSimulation *sim, double *out);

// # Safety
// `sim` must be a live handle; `out` must be writable.
enum GfStatus gf_simulation_event_count(const struct GfSimulation *sim, uint64_t *out);

// Empirical first moment `(1/N) Σ x_i`.
//
// # Safety
// `sim` must be a live handle; `out` must be writable.
enum GfStatus gf_simulation_mean(const struct GfSimulation *sim, double *out);

// Empirical transform `(1/N) Σ e^{-s x_i}` and, if `std_error` is not
// null, its standard error.
//
// # Safety
// `sim` must be a live handle; `out` must be writable; `std_error` may be
// null.
enum GfStatus gf_simulation_empirical_laplace(const struct GfSimulation *sim,
                                              double s,
                                              double *out,
                                              double *std_error);

// # Safety
// `sim` must be null or a live handle not freed before.
void gf_simulation_free(struct GfSimulation *sim);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GELFREE_H */
