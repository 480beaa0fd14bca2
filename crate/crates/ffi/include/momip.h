#ifndef MOMIP_H
#define MOMIP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by every entry point.
 */
typedef enum MomipStatus {
  MOMIP_STATUS_OK = 0,
  MOMIP_STATUS_NULL_POINTER = 1,
  MOMIP_STATUS_INVALID_ARGUMENT = 2,
  MOMIP_STATUS_CONFIG = 3,
  MOMIP_STATUS_EMPTY_ARCHIVE = 4,
  MOMIP_STATUS_NUMERICAL = 5,
  MOMIP_STATUS_BUFFER_TOO_SMALL = 6,
  MOMIP_STATUS_IO = 7,
  MOMIP_STATUS_PANIC = 8,
} MomipStatus;

/**
 * Built-in design problems.
 */
typedef enum MomipProblemKind {
  /**
   * Robust fuzzy H∞ design on the Lorenz model.
   */
  MOMIP_PROBLEM_KIND_EXAMPLE1 = 0,
  /**
   * The same design with `γ` as a second objective.
   */
  MOMIP_PROBLEM_KIND_EXAMPLE1_AUGMENTED = 1,
  /**
   * Bounded-input/output state feedback.
   */
  MOMIP_PROBLEM_KIND_EXAMPLE2 = 2,
} MomipProblemKind;

/**
 * Opaque design problem.
 */
typedef struct MomipProblem MomipProblem;

/**
 * Opaque result of an HMODE run.
 */
typedef struct MomipRun MomipRun;

/**
 * Result of a single candidate evaluation.
 */
typedef struct MomipEvaluation {
  bool feasible;
  /**
   * NaN when the builder rejected the candidate.
   */
  double lambda_star;
} MomipEvaluation;

/**
 * Mirror of the library's HMODE settings.
 */
typedef struct MomipHmodeConfig {
  size_t population;
  size_t iterations;
  double crossover_rate;
  double archive_spacing;
  double phase_fraction;
  uint64_t seed;
  double eps_feas;
} MomipHmodeConfig;

/**
 * Simulation settings. The initial state is the plant default.
 */
typedef struct MomipSimOptions {
  double dt;
  double horizon;
  uint64_t seed;
  bool perturbed;
  bool disturbances;
} MomipSimOptions;

/**
 * Closed-loop summary.
 */
typedef struct MomipSimMetrics {
  double max_u_norm;
  double max_y_norm;
  /**
   * NaN when no disturbance energy was injected.
   */
  double l2_ratio;
  bool diverged;
} MomipSimMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next failing call.
 */
const char *momip_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *momip_version(void);

/**
 * Creates one of the built-in problems.
 *
 * # Safety
 * `out` must be null or writable.
 */
enum MomipStatus momip_problem_new(enum MomipProblemKind kind, struct MomipProblem **out);

/**
 * Creates a problem from a plant JSON document (same schema as the CLI's plant files).
 *
 * # Safety
 * `json` must be null or a valid NUL-terminated string.
 */
enum MomipStatus momip_problem_from_plant_json(const char *json,
                                               bool augmented,
                                               struct MomipProblem **out);

/**
 * Releases a problem. Null is a no-op.
 *
 * # Safety
 * `problem` must be null or a handle from this library that has not been freed.
 */
void momip_problem_free(struct MomipProblem *problem);

/**
 * Number of scalar parameters in `α`; 0 for a null handle.
 *
 * # Safety
 * `problem` must be null or a live handle.
 */
size_t momip_problem_alpha_dim(const struct MomipProblem *problem);

/**
 * Number of objectives; 0 for a null handle.
 *
 * # Safety
 * `problem` must be null or a live handle.
 */
size_t momip_problem_objectives(const struct MomipProblem *problem);

/**
 * Copies the search box into `lo` and `hi`, each of capacity `len`.
 *
 * # Safety
 * `lo` and `hi` must each point to `len` writable doubles.
 */
enum MomipStatus momip_problem_bounds(const struct MomipProblem *problem,
                                      double *lo,
                                      double *hi,
                                      size_t len);

/**
 * Replaces the search box.
 *
 * # Safety
 * `lo` and `hi` must each point to `len` readable doubles.
 */
enum MomipStatus momip_problem_set_bounds(struct MomipProblem *problem,
                                          const double *lo,
                                          const double *hi,
                                          size_t len);

/**
 * Evaluates `α` (which must lie in the search box). Objectives go to `f_out`
 * when the candidate is feasible; pass `f_len = 0` to skip them.
 *
 * # Safety
 * `alpha` must point to `alpha_len` doubles and `f_out` to `f_len` writable doubles.
 */
enum MomipStatus momip_evaluate(const struct MomipProblem *problem,
                                const double *alpha,
                                size_t alpha_len,
                                double eps_feas,
                                struct MomipEvaluation *out,
                                double *f_out,
                                size_t f_len);

/**
 * Default HMODE settings.
 */
struct MomipHmodeConfig momip_hmode_config_default(void);

/**
 * Runs HMODE. An empty archive is still a successful run; check `momip_run_knee`.
 *
 * # Safety
 * `problem` and `config` must be live pointers; `out` must be writable.
 */
enum MomipStatus momip_hmode_run(const struct MomipProblem *problem,
                                 const struct MomipHmodeConfig *config,
                                 struct MomipRun **out);

/**
 * Releases a run. Null is a no-op.
 *
 * # Safety
 * `run` must be null or a handle from this library that has not been freed.
 */
void momip_run_free(struct MomipRun *run);

/**
 * Archive size; 0 for a null handle.
 *
 * # Safety
 * `run` must be null or a live handle.
 */
size_t momip_run_len(const struct MomipRun *run);

/**
 * Number of EVP evaluations performed; 0 for a null handle.
 *
 * # Safety
 * `run` must be null or a live handle.
 */
size_t momip_run_evaluations(const struct MomipRun *run);

/**
 * Copies archive entry `index`: objectives into `f_out`, parameters into
 * `alpha_out`, and the EVP optimum into `lambda_out` (each pointer optional
 * when its length is 0 or, for `lambda_out`, null).
 *
 * # Safety
 * Buffers must hold their stated lengths.
 */
enum MomipStatus momip_run_entry(const struct MomipRun *run,
                                 size_t index,
                                 double *f_out,
                                 size_t f_len,
                                 double *alpha_out,
                                 size_t alpha_len,
                                 double *lambda_out);

/**
 * Index and score of the knee entry; `EMPTY_ARCHIVE` when the run found nothing.
 *
 * # Safety
 * `index_out` must be writable; `score_out` may be null.
 */
enum MomipStatus momip_run_knee(const struct MomipRun *run, size_t *index_out, double *score_out);

/**
 * Recovered state-feedback gains of archive entry `index`, concatenated
 * row-major. `written` receives the number of doubles required, also when the
 * buffer is too small. `count`, `rows` and `cols` (optional) describe the shape.
 *
 * # Safety
 * `out` must hold `len` writable doubles; the shape pointers may be null.
 */
enum MomipStatus momip_run_entry_gains(const struct MomipRun *run,
                                       const struct MomipProblem *problem,
                                       size_t index,
                                       double *out,
                                       size_t len,
                                       size_t *written,
                                       size_t *count,
                                       size_t *rows,
                                       size_t *cols);

/**
 * Default simulation settings.
 */
struct MomipSimOptions momip_sim_options_default(void);

/**
 * Simulates the problem's plant under `count` gain matrices of shape
 * `rows × cols`, given row-major and concatenated. `count = 0` runs open loop.
 * Divergence is reported through `out->diverged`, not as an error.
 *
 * # Safety
 * `gains` must point to `count·rows·cols` doubles; `options` and `out` must be valid.
 */
enum MomipStatus momip_simulate(const struct MomipProblem *problem,
                                const double *gains,
                                size_t count,
                                size_t rows,
                                size_t cols,
                                const struct MomipSimOptions *options,
                                struct MomipSimMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOMIP_H */
