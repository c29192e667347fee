#ifndef MCPSD_H
#define MCPSD_H

/* C interface to the multi-coset power spectrum estimator.
 *
 * Every function returning mcpsd_status reports failures through the code
 * and leaves a message retrievable with mcpsd_last_error() on the calling
 * thread. Strings returned through char** are owned by the caller and must
 * be released with mcpsd_free_string(). Segment indices are 0-based here;
 * CSV output numbers segments from 1. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(MCPSD_BUILDING_LIBRARY)
#define MCPSD_API __declspec(dllexport)
#else
#define MCPSD_API __declspec(dllimport)
#endif
#else
#define MCPSD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mcpsd_status {
  MCPSD_OK = 0,
  MCPSD_ERR_INVALID_ARGUMENT = 1,
  MCPSD_ERR_INVALID_DIMENSIONS = 2,
  MCPSD_ERR_FEASIBILITY_EXHAUSTED = 3,
  MCPSD_ERR_RANK_DEFICIENT = 4,
  MCPSD_ERR_DELAY_OUT_OF_RANGE = 5,
  MCPSD_ERR_INVALID_LENGTH = 6,
  MCPSD_ERR_RECORD_TOO_SHORT = 7,
  MCPSD_ERR_INSTANCE_TOO_LARGE = 8,
  MCPSD_ERR_IO = 9,
  MCPSD_ERR_PARSE = 10,
  MCPSD_ERR_INTERNAL = 99
} mcpsd_status;

typedef enum mcpsd_kind { MCPSD_KIND_COMPLEX = 0, MCPSD_KIND_REAL = 1 } mcpsd_kind;

typedef struct mcpsd_pattern mcpsd_pattern;
typedef struct mcpsd_estimator mcpsd_estimator;
typedef struct mcpsd_record mcpsd_record;
typedef struct mcpsd_report mcpsd_report;

MCPSD_API const char* mcpsd_version(void);
MCPSD_API const char* mcpsd_status_string(mcpsd_status status);
/* Message of the last failure on this thread, "" if none. */
MCPSD_API const char* mcpsd_last_error(void);
MCPSD_API void mcpsd_free_string(char* s);

/* ---- sampling patterns ---- */

/* Random full-rank pattern; max_tries <= 0 and W <= 0 select the defaults. */
MCPSD_API mcpsd_status mcpsd_pattern_generate(int L, int q, uint64_t seed, int max_tries, double W,
                                              mcpsd_pattern** out);
MCPSD_API mcpsd_status mcpsd_pattern_create(int L, const int* offsets, int q, double W, mcpsd_pattern** out);
MCPSD_API mcpsd_status mcpsd_pattern_from_json(const char* json, mcpsd_pattern** out);
MCPSD_API void mcpsd_pattern_free(mcpsd_pattern* p);
MCPSD_API int mcpsd_pattern_L(const mcpsd_pattern* p);
MCPSD_API int mcpsd_pattern_q(const mcpsd_pattern* p);
/* Copies min(q, capacity) offsets. */
MCPSD_API mcpsd_status mcpsd_pattern_offsets(const mcpsd_pattern* p, int* out, size_t capacity);
/* {W, L, q, offsets, seed, conditionNumber} */
MCPSD_API mcpsd_status mcpsd_pattern_to_json(const mcpsd_pattern* p, char** out);
/* Pattern JSON plus rank, singular-value range, pseudoinverse residuals and
 * phi diagnostics. */
MCPSD_API mcpsd_status mcpsd_pattern_diagnostics(const mcpsd_pattern* p, char** out);

/* ---- records ---- */

/* model_json: {"type": "white" | "filtered", ...}; NULL means the default
 * white model. */
MCPSD_API mcpsd_status mcpsd_record_generate(const char* model_json, size_t nx, uint64_t seed,
                                             mcpsd_record** out);
/* im may be NULL for a real record. */
MCPSD_API mcpsd_status mcpsd_record_from_samples(const double* re, const double* im, size_t n, double W,
                                                 mcpsd_record** out);
MCPSD_API mcpsd_status mcpsd_record_read_csv(const char* path, double W, mcpsd_record** out);
MCPSD_API mcpsd_status mcpsd_record_write_csv(const mcpsd_record* r, const char* path, mcpsd_kind kind);
MCPSD_API size_t mcpsd_record_size(const mcpsd_record* r);
MCPSD_API void mcpsd_record_free(mcpsd_record* r);

/* ---- estimation ---- */

/* Nh <= 0 and D < 0 select the defaults (25, 12). */
MCPSD_API mcpsd_status mcpsd_estimator_create(const mcpsd_pattern* p, int Nh, int D, mcpsd_estimator** out);
MCPSD_API void mcpsd_estimator_free(mcpsd_estimator* e);
MCPSD_API mcpsd_status mcpsd_estimator_bank_json(const mcpsd_estimator* e, char** out);
/* Writes L segment powers. */
MCPSD_API mcpsd_status mcpsd_estimate(const mcpsd_estimator* e, const mcpsd_record* r, double* p_out,
                                      size_t capacity);
/* segment_index, f_low_hz, f_high_hz, p_hat */
MCPSD_API mcpsd_status mcpsd_estimate_csv(const mcpsd_estimator* e, const mcpsd_record* r, char** out);

/* ---- closed-form analysis ---- */

MCPSD_API mcpsd_status mcpsd_analyze_white(const mcpsd_estimator* e, long long nx, double sigma2,
                                           mcpsd_kind kind, mcpsd_report** out);
MCPSD_API void mcpsd_report_free(mcpsd_report* r);
MCPSD_API mcpsd_status mcpsd_report_bias(const mcpsd_report* r, double* out, size_t capacity);
MCPSD_API mcpsd_status mcpsd_report_var_exact(const mcpsd_report* r, double* out, size_t capacity);
MCPSD_API mcpsd_status mcpsd_report_var_approx(const mcpsd_report* r, double* out);
/* Row-major L x L. */
MCPSD_API mcpsd_status mcpsd_report_covariance(const mcpsd_report* r, double* out, size_t capacity);
MCPSD_API mcpsd_status mcpsd_report_to_json(const mcpsd_report* r, char** out);
/* segment_index, bias, var_exact, var_approx */
MCPSD_API mcpsd_status mcpsd_report_to_csv(const mcpsd_report* r, char** out);

/* ---- harness ----
 * config_json keys: model, grid, nx, trials, seed, Nh, D, maxTries, workers,
 * outputDir. Outputs go to outputDir; the run manifest is returned. */

MCPSD_API mcpsd_status mcpsd_run_montecarlo(const char* config_json, char** manifest_out);
/* figure: "fig1".."fig6"; config keys override the figure defaults.
 * montecarlo = 0 fills only the analytic columns. */
MCPSD_API mcpsd_status mcpsd_emit_figure(const char* figure, const char* config_json, int montecarlo,
                                         char** manifest_out);
/* Returns the validation table as CSV; never fails on infeasible points. */
MCPSD_API mcpsd_status mcpsd_validate(const char* config_json, char** csv_out);

#ifdef __cplusplus
}
#endif

#endif /* MCPSD_H */
