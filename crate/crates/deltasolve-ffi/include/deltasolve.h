#ifndef DELTASOLVE_H
#define DELTASOLVE_H

/* Generated by cbindgen from deltasolve-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status code of every fallible call.
 */
typedef enum ds_status {
  DS_STATUS_OK = 0,
  DS_STATUS_NULL_POINTER = 1,
  DS_STATUS_INVALID_ARGUMENT = 2,
  DS_STATUS_SINGULAR_GAMMA = 3,
  DS_STATUS_CENTER_COINCIDENCE = 4,
  DS_STATUS_CONVERGENCE_FAILURE = 5,
  DS_STATUS_DOMAIN_ERROR = 6,
  DS_STATUS_DEGENERATE_FIT = 7,
  DS_STATUS_BUFFER_TOO_SMALL = 8,
  DS_STATUS_INTERNAL_PANIC = 9,
} ds_status;

/*
 Opaque Gaussian-sum initial datum.
 */
typedef struct ds_gaussian_sum ds_gaussian_sum;

/*
 Opaque interaction configuration (centers and strengths).
 */
typedef struct ds_interaction ds_interaction;

/*
 One bound state row of `ds_eigenvalues`.
 */
typedef struct ds_eigenvalue {
  double kappa;
  double energy;
  size_t multiplicity;
} ds_eigenvalue;

/*
 Evolution parameters; zero-initialize and override what you need.
 */
typedef struct ds_evolve_params {
  /*
   initial spectral cutoff M0 (0 selects the default 8.0)
   */
  double m0;
  /*
   relative tolerance of the cutoff ladder (0 selects 1e-4)
   */
  double tol;
  /*
   evolve only the absolutely continuous part when nonzero
   */
  int32_t continuous_only;
} ds_evolve_params;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message associated with the most recent error on this thread. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *ds_last_error_message(void);

/*
 Version string of the engine, static storage.
 */
const char *ds_version(void);

/*
 Create an interaction configuration from `n` centers (3n coordinates,
 xyz-interleaved) and `n` strengths.

 # Safety
 `centers` must point to 3n doubles, `alphas` to n doubles, `out` to a
 writable pointer slot.
 */
enum ds_status ds_interaction_new(const double *centers,
                                  const double *alphas,
                                  size_t n,
                                  struct ds_interaction **out);

/*
 # Safety
 `handle` must come from `ds_interaction_new` and not be used afterwards.
 */
void ds_interaction_free(struct ds_interaction *handle);

/*
 Create a Gaussian-sum datum from `n` terms.

 # Safety
 `amp_re`, `amp_im`, `sigmas` point to n doubles each, `centers` to 3n.
 */
enum ds_status ds_gaussian_sum_new(const double *amp_re,
                                   const double *amp_im,
                                   const double *centers,
                                   const double *sigmas,
                                   size_t n,
                                   struct ds_gaussian_sum **out);

/*
 # Safety
 `handle` must come from `ds_gaussian_sum_new` and not be used afterwards.
 */
void ds_gaussian_sum_free(struct ds_gaussian_sum *handle);

/*
 Negative eigenvalues E = -kappa^2 with multiplicities. `kappa_max <= 0`
 selects the default scan ceiling. Writes at most `cap` rows and stores the
 number found in `n_out`; returns BufferTooSmall when `cap` is exceeded
 (with `n_out` still set to the total count).

 # Safety
 `rows` must point to `cap` writable DsEigenvalue slots, `n_out` to a slot.
 */
enum ds_status ds_eigenvalues(const struct ds_interaction *interaction,
                              double kappa_max,
                              struct ds_eigenvalue *rows,
                              size_t cap,
                              size_t *n_out);

/*
 Weight w(x) = sum_j (1 + 1/|x - y_j|).

 # Safety
 `x` points to 3 doubles, `out` to one.
 */
enum ds_status ds_weight(const struct ds_interaction *interaction, const double *x, double *out);

/*
 Free evolution of the datum at (x, t).

 # Safety
 `x` points to 3 doubles; `re`, `im` to one double each.
 */
enum ds_status ds_free_evolve(const struct ds_gaussian_sum *f,
                              const double *x,
                              double t,
                              double *re,
                              double *im);

/*
 Full evolution (U(t) f)(x) of the interacting flow; `params` may be null
 for defaults.

 # Safety
 `x` points to 3 doubles; `re`, `im` to one double each; `params` is null
 or points to a valid parameter struct.
 */
enum ds_status ds_evolve(const struct ds_interaction *interaction,
                         const struct ds_gaussian_sum *f,
                         const double *x,
                         double t,
                         const struct ds_evolve_params *params,
                         double *re,
                         double *im);

/*
 Resolvent action (R(z^2) f)(x) at z = z_re + i z_im.

 # Safety
 `x` points to 3 doubles; `re`, `im` to one double each.
 */
enum ds_status ds_resolvent_apply(const struct ds_interaction *interaction,
                                  const struct ds_gaussian_sum *f,
                                  const double *x,
                                  double z_re,
                                  double z_im,
                                  double *re,
                                  double *im);

/*
 Weighted-sup decay scan over the default deterministic grid: fills
 `norms[i]` with sup_x w^{-1} |(U(t_i) P_ac-or-full f)(x)| and reports the
 fitted slope and constant.

 # Safety
 `times` and `norms` point to `n_times` doubles; `slope`, `constant` to one
 double each; `params` is null or valid.
 */
enum ds_status ds_decay_scan(const struct ds_interaction *interaction,
                             const struct ds_gaussian_sum *f,
                             const double *times,
                             size_t n_times,
                             const struct ds_evolve_params *params,
                             double *norms,
                             double *slope,
                             double *constant);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DELTASOLVE_H */
