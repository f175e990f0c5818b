#ifndef MOCV_H
#define MOCV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MocvStatus {
  MOCV_STATUS_OK = 0,
  MOCV_STATUS_NULL_POINTER = 1,
  MOCV_STATUS_INVALID_ARGUMENT = 2,
  MOCV_STATUS_PARSE_ERROR = 3,
  MOCV_STATUS_CONFIG_ERROR = 4,
  MOCV_STATUS_HYPOTHESIS_VIOLATED = 5,
  MOCV_STATUS_SOLVER_FAILED = 6,
  MOCV_STATUS_DOMAIN_ERROR = 7,
  MOCV_STATUS_IO_ERROR = 8,
  MOCV_STATUS_BUFFER_TOO_SMALL = 9,
  MOCV_STATUS_PANIC = 10,
} MocvStatus;

// Opaque scenario handle.
typedef struct MocvScenario MocvScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses a scenario from NUL-terminated TOML text. `k_grid = 0` keeps the
// grid size of the text.
//
// # Safety
// `text` must be a valid NUL-terminated string and `out` a valid pointer.
enum MocvStatus mocv_scenario_from_toml(const char *text,
                                        uint32_t k_grid,
                                        struct MocvScenario **out);

// Loads a scenario file.
//
// # Safety
// `path` must be a valid NUL-terminated string and `out` a valid pointer.
enum MocvStatus mocv_scenario_from_file(const char *path,
                                        uint32_t k_grid,
                                        struct MocvScenario **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `scn` must come from one of the constructors and not be used afterwards.
void mocv_scenario_free(struct MocvScenario *scn);

// State dimension `n`, objective dimension `d` and base grid size `K`.
//
// # Safety
// All pointers must be valid; `scn` must be a live handle.
enum MocvStatus mocv_scenario_dims(const struct MocvScenario *scn, size_t *n, size_t *d, size_t *k);

// Copies base direction `k` (length `d`) into `out`.
//
// # Safety
// `out` must hold `len` doubles; `scn` must be a live handle.
enum MocvStatus mocv_base_direction(const struct MocvScenario *scn,
                                    size_t k,
                                    double *out,
                                    size_t len);

// Value thresholds `v_k` of `U(t, x)` for every base direction.
//
// # Safety
// `x` must hold `n` doubles and `out` `len` doubles; `scn` must be live.
enum MocvStatus mocv_value_thresholds(const struct MocvScenario *scn,
                                      double t,
                                      const double *x,
                                      size_t n,
                                      double *out,
                                      size_t len);

// Solves for `p(t, x, ζ_k)`. `iterations` and `residual` may be null.
//
// # Safety
// `x` and `p_out` must hold `n` doubles; `scn` must be live.
enum MocvStatus mocv_solve_p(const struct MocvScenario *scn,
                             double t,
                             const double *x,
                             size_t n,
                             size_t k,
                             double *p_out,
                             uint32_t *iterations,
                             double *residual);

// Largest `|HJB residual|` over the base directions at `(t, x)`.
//
// # Safety
// `x` must hold `n` doubles and `out` must be valid; `scn` must be live.
enum MocvStatus mocv_hjb_max_residual(const struct MocvScenario *scn,
                                      double t,
                                      const double *x,
                                      size_t n,
                                      double *out);

// Copies the calling thread's last error message into `buf` (NUL
// terminated, truncated to `len`). Returns the full message length plus one,
// so a caller can size the buffer with a first call using `len = 0`.
//
// # Safety
// `buf` must hold `len` bytes or be null with `len = 0`.
size_t mocv_last_error_message(char *buf, size_t len);

// Library version, a static NUL-terminated string.
const char *mocv_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOCV_H */
