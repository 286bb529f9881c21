#ifndef PENALAP_H
#define PENALAP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes. Values are stable.
 */
typedef enum PenalapStatus {
  PENALAP_STATUS_OK = 0,
  PENALAP_STATUS_NULL_POINTER = 1,
  PENALAP_STATUS_INVALID_ARGUMENT = 2,
  PENALAP_STATUS_CONFIG = 3,
  PENALAP_STATUS_SOLVER = 4,
  PENALAP_STATUS_BUDGET = 5,
  PENALAP_STATUS_IO = 6,
  PENALAP_STATUS_PANIC = 7,
  /*
   The caller's buffer is too short; nothing was written.
   */
  PENALAP_STATUS_BUFFER_TOO_SMALL = 8,
} PenalapStatus;

/*
 A parsed case file.
 */
typedef struct PenalapCase PenalapCase;

/*
 A steady convection state with its diagnostics.
 */
typedef struct PenalapConvection PenalapConvection;

/*
 Output of a case with a closed-form oracle.
 */
typedef struct PenalapSolution PenalapSolution;

typedef struct PenalapErrorReport {
  size_t n;
  double h;
  double eta;
  double err_linf;
  double err_l1;
  double err_l2;
  double runtime_s;
  size_t iterations;
} PenalapErrorReport;

typedef struct PenalapConvectionSummary {
  bool converged;
  size_t steps;
  double time;
  double nusselt;
  double wall_flux;
  double asymmetry_phi;
  double asymmetry_speed;
  size_t sor_sweeps;
} PenalapConvectionSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. Valid until the
 next call into the library from this thread.
 */
const char *penalap_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *penalap_version(void);

/*
 Exact same-flux solution `w(x)` for source `m^2 cos(m x)` and flux `alpha`.

 # Safety
 `out` must be valid for one write.
 */
enum PenalapStatus penalap_exact_same_flux(uint32_t m,
                                           double alpha,
                                           double eta,
                                           double x,
                                           double *out);

/*
 Closed-form penalized same-flux solution `v(x)`.

 # Safety
 `out` must be valid for one write.
 */
enum PenalapStatus penalap_penalized_same_flux(uint32_t m,
                                               double alpha,
                                               double eta,
                                               double x,
                                               double *out);

/*
 Least-squares slope of `log err` against `log h`.

 # Safety
 `h` and `err` must each point to `len` values; `out` must be writable.
 */
enum PenalapStatus penalap_fit_order(const double *h, const double *err, size_t len, double *out);

/*
 Parses and validates a case from `key = value` text.

 # Safety
 `text` must be a NUL-terminated string; `out` must be writable.
 */
enum PenalapStatus penalap_case_parse(const char *text, struct PenalapCase **out);

/*
 Overrides the grid size of a parsed case.

 # Safety
 `case` must come from [`penalap_case_parse`].
 */
enum PenalapStatus penalap_case_set_n(struct PenalapCase *case_, size_t n);

/*
 Overrides every penalization parameter of a parsed case.

 # Safety
 `case` must come from [`penalap_case_parse`].
 */
enum PenalapStatus penalap_case_set_eta(struct PenalapCase *case_, double eta);

/*
 # Safety
 `case` must come from [`penalap_case_parse`] or be null.
 */
void penalap_case_free(struct PenalapCase *case_);

/*
 Solves a case that has a closed-form oracle.

 # Safety
 `case` must come from [`penalap_case_parse`]; `out` must be writable.
 */
enum PenalapStatus penalap_solve(const struct PenalapCase *case_, struct PenalapSolution **out);

/*
 # Safety
 `sol` must come from [`penalap_solve`]; `out` must be writable.
 */
enum PenalapStatus penalap_solution_report(const struct PenalapSolution *sol,
                                           struct PenalapErrorReport *out);

/*
 Copies the numerical solution at grid nodes (x fastest). Pass a null
 buffer with `cap = 0` to query the length.

 # Safety
 `buf` must hold `cap` values; `len` may be null.
 */
enum PenalapStatus penalap_solution_values(const struct PenalapSolution *sol,
                                           double *buf,
                                           size_t cap,
                                           size_t *len);

/*
 Copies the exact solution at grid nodes; NaN outside the fluid.

 # Safety
 As for [`penalap_solution_values`].
 */
enum PenalapStatus penalap_solution_reference(const struct PenalapSolution *sol,
                                              double *buf,
                                              size_t cap,
                                              size_t *len);

/*
 # Safety
 `sol` must come from [`penalap_solve`] or be null.
 */
void penalap_solution_free(struct PenalapSolution *sol);

/*
 Marches a convection case to steady state. This can take minutes.

 # Safety
 `case` must come from [`penalap_case_parse`]; `out` must be writable.
 */
enum PenalapStatus penalap_convection_run(const struct PenalapCase *case_,
                                          struct PenalapConvection **out);

/*
 # Safety
 `conv` must come from [`penalap_convection_run`]; `out` must be writable.
 */
enum PenalapStatus penalap_convection_summary(const struct PenalapConvection *conv,
                                              struct PenalapConvectionSummary *out);

/*
 Copies the inner-wall profile: angles in degrees and wall temperatures.

 # Safety
 `theta_deg` and `phi` must each hold `cap` values; `len` may be null.
 */
enum PenalapStatus penalap_convection_profile(const struct PenalapConvection *conv,
                                              double *theta_deg,
                                              double *phi,
                                              size_t cap,
                                              size_t *len);

/*
 Copies the cell-centred temperature (x fastest).

 # Safety
 As for [`penalap_solution_values`].
 */
enum PenalapStatus penalap_convection_temperature(const struct PenalapConvection *conv,
                                                  double *buf,
                                                  size_t cap,
                                                  size_t *len);

/*
 # Safety
 `conv` must come from [`penalap_convection_run`] or be null.
 */
void penalap_convection_free(struct PenalapConvection *conv);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PENALAP_H */
