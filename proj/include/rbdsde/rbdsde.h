#ifndef RBDSDE_RBDSDE_H
#define RBDSDE_RBDSDE_H

#include <stddef.h>

#if defined(_WIN32)
#define RBD_API __declspec(dllexport)
#else
#define RBD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rbd_status {
    RBD_OK = 0,
    RBD_ERR_INVALID_ARGUMENT = 1, /* null pointer or out-of-range index */
    RBD_ERR_CONFIG = 2,           /* bad or missing configuration key */
    RBD_ERR_PRECONDITION = 3,     /* inputs violate an operation's requirements */
    RBD_ERR_NUMERIC = 4,          /* singular projection, divergence, non-finite values */
    RBD_ERR_INTERNAL = 5
} rbd_status;

typedef struct rbd_lattice rbd_lattice;
typedef struct rbd_run rbd_run;

/** Message of the last failed call on this thread; "" after a success. */
RBD_API const char* rbd_last_error(void);

/** Builds a lattice from the JSON body of a "lattice" config object. */
RBD_API rbd_status rbd_lattice_create(const char* lattice_json, rbd_lattice** out);
RBD_API void rbd_lattice_destroy(rbd_lattice* lattice);
RBD_API rbd_status rbd_lattice_node_count(const rbd_lattice* lattice, size_t* out);
RBD_API rbd_status rbd_lattice_steps(const rbd_lattice* lattice, int* out);
/** E[values(child) | node]; `values` is indexed by node id and has node_count entries. */
RBD_API rbd_status rbd_lattice_conditional_expectation(const rbd_lattice* lattice, const double* values,
                                                       size_t count, size_t node, double* out);

/** Smallest admissible norm weight for the given epsilon and alpha (epsilon + alpha < 1). */
RBD_API rbd_status rbd_beta_floor(double epsilon, double alpha, double* beta0);

/** American put on a binomial walk with a constant short rate; price from the reflected solver. */
RBD_API rbd_status rbd_price_american(double s0, double up, double down, double rate, double strike,
                                      int n_steps, double horizon, double* price);

/**
 * Runs one experiment. mode is one of decoupled, picard, minimal,
 * price_american, verify_suite. config_path may be NULL for verify_suite;
 * out_dir and beta may be NULL to keep the file values. Configuration and
 * runtime failures do not fail the call: they are reported through the
 * run's exit code and message.
 */
RBD_API rbd_status rbd_run_create(const char* mode, const char* config_path, const char* out_dir,
                                  const double* beta, int refine, rbd_run** out);
RBD_API void rbd_run_destroy(rbd_run* run);
/** 0 all checks pass, 1 a check or the numerics failed, 2 configuration error. */
RBD_API int rbd_run_exit_code(const rbd_run* run);
RBD_API const char* rbd_run_message(const rbd_run* run);
RBD_API size_t rbd_run_check_count(const rbd_run* run);
RBD_API rbd_status rbd_run_check(const rbd_run* run, size_t index, const char** name, int* pass,
                                 double* max_violation, double* tolerance);
RBD_API size_t rbd_run_file_count(const rbd_run* run);
RBD_API const char* rbd_run_file(const rbd_run* run, size_t index);

#ifdef __cplusplus
}
#endif

#endif
