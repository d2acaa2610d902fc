/* C interface to the stochastic Volterra equation toolkit.
 *
 * All objects are opaque handles created by *_create / *_parse functions and
 * released with the matching *_free. Every call returns an sve_status; on
 * failure sve_last_error() describes the problem for the calling thread.
 * Strings returned through char** are owned by the caller and released with
 * sve_string_free.
 */
#ifndef SVE_SVE_H
#define SVE_SVE_H

#include <stddef.h>
#include <stdint.h>

#if defined(SVE_BUILDING_LIBRARY)
#define SVE_API __attribute__((visibility("default")))
#else
#define SVE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sve_status {
  SVE_OK = 0,
  SVE_ERR_NULL_ARGUMENT = 1,
  SVE_ERR_INVALID_PARAMETER = 2,
  SVE_ERR_DOMAIN = 3,
  SVE_ERR_MISSING_DERIVATIVE = 4,
  SVE_ERR_QUADRATURE = 5,
  SVE_ERR_INCOMPATIBLE_GRID = 6,
  SVE_ERR_NON_FINITE = 7,
  SVE_ERR_NOT_CONVOLUTION = 8,
  SVE_ERR_DEGENERATE = 9,
  SVE_ERR_INSUFFICIENT_PATHS = 10,
  SVE_ERR_MISSING_AUX = 11,
  SVE_ERR_IDENTICAL_CONFIG = 12,
  SVE_ERR_CONSTRUCTION = 13,
  SVE_ERR_ROOT_NOT_BRACKETED = 14,
  SVE_ERR_DIVERGENCE_AUDIT = 15,
  SVE_ERR_SYNTAX = 16,
  SVE_ERR_VALIDATION = 17,
  SVE_ERR_IO = 18,
  SVE_ERR_INTERNAL = 19
} sve_status;

typedef struct sve_experiment sve_experiment;
typedef struct sve_kernel sve_kernel;
typedef struct sve_driver sve_driver;
typedef struct sve_smoother sve_smoother;

/* Message of the last failed call on this thread ("" if none). */
SVE_API const char* sve_last_error(void);
SVE_API const char* sve_status_name(sve_status status);
SVE_API const char* sve_version(void);
SVE_API void sve_string_free(char* s);

/* Experiments ------------------------------------------------------------ */

/* Parses a JSON config. On SVE_ERR_VALIDATION the last error lists every
 * problem, one per line. */
SVE_API sve_status sve_experiment_parse(const char* text, sve_experiment** out);
SVE_API sve_status sve_experiment_load(const char* path, sve_experiment** out);
SVE_API sve_status sve_experiment_set_output_dir(sve_experiment* e, const char* dir);
SVE_API sve_status sve_experiment_set_seed(sve_experiment* e, uint64_t seed);
/* Runs all analyses. *any_failed is set to 1 if at least one analysis failed;
 * *manifest_path (optional) receives the manifest location. */
SVE_API sve_status sve_experiment_run(sve_experiment* e, unsigned workers, int* any_failed, char** manifest_path);
/* Kernel and coefficient audits; *passed is 1 when every check holds. */
SVE_API sve_status sve_experiment_audit(const sve_experiment* e, int* passed, char** report_json);
SVE_API void sve_experiment_free(sve_experiment* e);

SVE_API sve_status sve_manifest_summary(const char* manifest_path, char** summary);

/* Kernels ---------------------------------------------------------------- */

SVE_API sve_status sve_kernel_create(const char* family, const double* params, size_t n_params, double T,
                                     sve_kernel** out);
SVE_API sve_status sve_kernel_eval(const sve_kernel* k, double s, double t, double* value);
SVE_API sve_status sve_kernel_is_flagged(const sve_kernel* k, int* flagged);
SVE_API void sve_kernel_free(sve_kernel* k);

/* Brownian drivers -------------------------------------------------------- */

SVE_API sve_status sve_driver_sample(uint64_t seed, double T, unsigned level, sve_driver** out);
SVE_API sve_status sve_driver_increments(const sve_driver* d, const double** data, size_t* count);
/* Increments aggregated to a coarser level into caller storage of 2^level doubles. */
SVE_API sve_status sve_driver_restrict(const sve_driver* d, unsigned level, double* out, size_t capacity);
SVE_API void sve_driver_free(sve_driver* d);

/* Smooth approximations of |x| -------------------------------------------- */

SVE_API sve_status sve_smoother_create(double delta, double eps, sve_smoother** out);
SVE_API sve_status sve_smoother_eval(const sve_smoother* s, double x, double* phi, double* phi_prime,
                                     double* phi_second);
SVE_API void sve_smoother_free(sve_smoother* s);

/* Thresholds a[0..n_max] of the Yamada-Watanabe sequence for modulus rho;
 * `out` must hold n_max + 1 doubles. */
SVE_API sve_status sve_yw_thresholds(double (*rho)(double x, void* user), void* user, size_t n_max, double* out);

#ifdef __cplusplus
}
#endif

#endif /* SVE_SVE_H */
