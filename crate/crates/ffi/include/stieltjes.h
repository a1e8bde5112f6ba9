#ifndef STIELTJES_H
#define STIELTJES_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every entry point.
typedef enum StjStatus {
  STJ_STATUS_OK = 0,
  STJ_STATUS_NULL_POINTER = 1,
  STJ_STATUS_INVALID_ARGUMENT = 2,
  STJ_STATUS_NUMERICAL = 3,
  STJ_STATUS_BUFFER_TOO_SMALL = 4,
  STJ_STATUS_PANIC = 5,
} StjStatus;

// A left-continuous derivator of bounded variation.
typedef struct StjDerivator StjDerivator;

// A PV/battery scenario.
typedef struct StjScenario StjScenario;

// A solver trajectory: grid times and one state vector per time.
typedef struct StjTrajectory StjTrajectory;

// Scalar function of time. `user` is passed through unchanged.
typedef double (*StjScalarFn)(double t, void *user);

// Right-hand side: writes `n` rates for time `t` and state `x` to `out`.
typedef void (*StjRhsFn)(double t, const double *x, double *out, size_t n, void *user);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null after a success.
const char *stj_last_error(void);

// Frees a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void stj_string_free(char *s);

// Parses a derivator from its JSON description.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum StjStatus stj_derivator_from_json(const char *json, struct StjDerivator **out);

// `g(t) = t - a` on `[a, b]`.
//
// # Safety
// `out` must be writable.
enum StjStatus stj_derivator_identity(double a, double b, struct StjDerivator **out);

// Piecewise-linear derivator: `n_breakpoints` breakpoints, one slope per
// segment, and `n_jumps` jumps given as parallel arrays of times and sizes.
//
// # Safety
// Arrays must hold the stated number of elements; `out` must be writable.
enum StjStatus stj_derivator_piecewise_linear(double anchor,
                                              const double *breakpoints,
                                              size_t n_breakpoints,
                                              const double *slopes,
                                              const double *jump_times,
                                              const double *jump_sizes,
                                              size_t n_jumps,
                                              struct StjDerivator **out);

// # Safety
// `g` must come from this library and not be freed twice. Null is ignored.
void stj_derivator_free(struct StjDerivator *g);

// Writes the domain `[a, b]`.
//
// # Safety
// Pointers must be valid.
enum StjStatus stj_derivator_domain(const struct StjDerivator *g, double *a, double *b);

// `g(t)`.
//
// # Safety
// Pointers must be valid.
enum StjStatus stj_derivator_eval(const struct StjDerivator *g, double t, double *out);

// `g(t⁺)`.
//
// # Safety
// Pointers must be valid.
enum StjStatus stj_derivator_eval_right(const struct StjDerivator *g, double t, double *out);

// Total variation over the whole domain.
//
// # Safety
// Pointers must be valid.
enum StjStatus stj_derivator_total_variation(const struct StjDerivator *g, double *out);

// Variation function `t ↦ var_g[a, t]` as a new derivator.
//
// # Safety
// Pointers must be valid.
enum StjStatus stj_derivator_variation(const struct StjDerivator *g, struct StjDerivator **out);

// Positive and negative variations with `g = g(a) + positive - negative`.
//
// # Safety
// Pointers must be valid.
enum StjStatus stj_derivator_jordan(const struct StjDerivator *g,
                                    struct StjDerivator **positive,
                                    struct StjDerivator **negative);

// JSON description; release with `stj_string_free`.
//
// # Safety
// Pointers must be valid.
enum StjStatus stj_derivator_to_json(const struct StjDerivator *g, char **out);

// `μ_g([u, v))`.
//
// # Safety
// Pointers must be valid.
enum StjStatus stj_measure(const struct StjDerivator *g, double u, double v, double *out);

// `∫_{[u, v)} f dμ_g` for a callback `f`.
//
// # Safety
// Pointers must be valid; `f` must be callable with `user`.
enum StjStatus stj_integrate(const struct StjDerivator *g,
                             StjScalarFn f,
                             void *user,
                             double u,
                             double v,
                             double *out);

// g-exponential `e_h(t; a)` for a callback `h`.
//
// # Safety
// Pointers must be valid; `h` must be callable with `user`.
enum StjStatus stj_gexp(const struct StjDerivator *g,
                        StjScalarFn h,
                        void *user,
                        double t,
                        double *out);

// Stieltjes–Euler solve of `x'_{g_i} = f_i(t, x)` with one derivator per
// component.
//
// # Safety
// `derivators` and `x0` must hold `n` elements; `rhs` must be callable with
// `user`; `out` must be writable.
enum StjStatus stj_euler_solve(const struct StjDerivator *const *derivators,
                               size_t n,
                               const double *x0,
                               StjRhsFn rhs,
                               void *user,
                               double step,
                               struct StjTrajectory **out);

// # Safety
// `tr` must come from this library and not be freed twice. Null is ignored.
void stj_trajectory_free(struct StjTrajectory *tr);

// Number of grid points and state dimension.
//
// # Safety
// Pointers must be valid.
enum StjStatus stj_trajectory_shape(const struct StjTrajectory *tr, size_t *len, size_t *dim);

// Copies the grid times into `buf` (capacity `cap`).
//
// # Safety
// `buf` must hold `cap` elements.
enum StjStatus stj_trajectory_times(const struct StjTrajectory *tr, double *buf, size_t cap);

// Copies the states row by row (`len × dim` values) into `buf`.
//
// # Safety
// `buf` must hold `cap` elements.
enum StjStatus stj_trajectory_states(const struct StjTrajectory *tr, double *buf, size_t cap);

// The built-in seven-day scenario with the reference parameters.
//
// # Safety
// `out` must be writable.
enum StjStatus stj_scenario_default(struct StjScenario **out);

// Scenario from TOML text. Relative weather paths resolve against
// `base_dir`, or the working directory when it is null.
//
// # Safety
// Strings must be NUL-terminated; `out` must be writable.
enum StjStatus stj_scenario_from_toml(const char *toml,
                                      const char *base_dir,
                                      struct StjScenario **out);

// # Safety
// `sc` must come from this library and not be freed twice. Null is ignored.
void stj_scenario_free(struct StjScenario *sc);

// Runs the scenario; the trajectory holds `(E [Wh], H, S)`.
//
// # Safety
// Pointers must be valid.
enum StjStatus stj_scenario_simulate(const struct StjScenario *sc, struct StjTrajectory **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STIELTJES_H */
