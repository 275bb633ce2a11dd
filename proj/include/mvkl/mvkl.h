/* C interface to the mvkl solver library. */
#ifndef MVKL_MVKL_H
#define MVKL_MVKL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(MVKL_BUILDING_SHARED)
#    define MVKL_API __declspec(dllexport)
#  else
#    define MVKL_API __declspec(dllimport)
#  endif
#else
#  define MVKL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mvkl_status {
    MVKL_OK = 0,
    MVKL_ERR_ARGUMENT = 1,   /* null handle, short buffer, bad index */
    MVKL_ERR_VALIDATION = 2, /* configuration or problem rejected */
    MVKL_ERR_SOLVER = 3,     /* numerical failure while solving */
    MVKL_ERR_IO = 4,         /* file could not be read or written */
    MVKL_ERR_INTERNAL = 5
} mvkl_status;

/* A loaded, validated run configuration and its assembled problem. */
typedef struct mvkl_run mvkl_run;
/* Result of a solve, or a report read back from disk. */
typedef struct mvkl_report mvkl_report;

MVKL_API const char* mvkl_version(void);

/* Message for the last failing call on this thread; never NULL. */
MVKL_API const char* mvkl_last_error(void);

MVKL_API mvkl_status mvkl_run_load(const char* config_path, mvkl_run** out);
MVKL_API void mvkl_run_free(mvkl_run* run);

MVKL_API mvkl_status mvkl_run_set_seed(mvkl_run* run, uint64_t seed);
MVKL_API mvkl_status mvkl_run_set_lhs_count(mvkl_run* run, int count);

/* Total coefficient length N and number of labeled/unlabeled points. */
MVKL_API mvkl_status mvkl_run_dims(const mvkl_run* run, size_t* n_coeffs, size_t* n_labeled,
                                   size_t* n_unlabeled);

/* Diagnostics as JSON text. *len receives the full length (excluding the
   terminator); MVKL_ERR_ARGUMENT if cap is too small. */
MVKL_API mvkl_status mvkl_run_check(const mvkl_run* run, char* buf, size_t cap, size_t* len);

MVKL_API mvkl_status mvkl_run_solve(const mvkl_run* run, mvkl_report** out);

/* Report, trace and meshes named in the configuration, into out_dir. */
MVKL_API mvkl_status mvkl_run_write_outputs(const mvkl_run* run, const mvkl_report* report,
                                            const char* out_dir);
/* Meshes only, from the report's best coefficients. */
MVKL_API mvkl_status mvkl_run_write_meshes(const mvkl_run* run, const mvkl_report* report,
                                           const char* out_dir);

/* I(a) for caller-supplied coefficients of length N. */
MVKL_API mvkl_status mvkl_run_objective(const mvkl_run* run, const double* a, size_t n, double* out);

/* Section value at x (ambient_dim coordinates) tagged with region; writes
   dx components. */
MVKL_API mvkl_status mvkl_run_evaluate(const mvkl_run* run, const mvkl_report* report, const double* x,
                                       size_t x_len, int region, int dx, double* out);

MVKL_API mvkl_status mvkl_report_load(const char* report_path, mvkl_report** out);
MVKL_API void mvkl_report_free(mvkl_report* report);

MVKL_API mvkl_status mvkl_report_objective(const mvkl_report* report, double* out);

/* Copies best coefficients; *n receives their count. Pass buf=NULL to query. */
MVKL_API mvkl_status mvkl_report_coefficients(const mvkl_report* report, double* buf, size_t cap,
                                              size_t* n);

/* Number of starts that met the admissibility tolerance. */
MVKL_API mvkl_status mvkl_report_admissible_count(const mvkl_report* report, int* out);

#ifdef __cplusplus
}
#endif

#endif
