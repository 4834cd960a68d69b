#ifndef NFV_H
#define NFV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum NfvStatus {
  NFV_STATUS_OK = 0,
  NFV_STATUS_NULL_POINTER = 1,
  NFV_STATUS_INVALID_ARGUMENT = 2,
  NFV_STATUS_CONFIG = 3,
  NFV_STATUS_SHAPE_MISMATCH = 4,
  NFV_STATUS_STEP_FAILURE = 5,
  NFV_STATUS_IO = 6,
  NFV_STATUS_PANIC = 7,
} NfvStatus;

// Time direction for [`nfv_solver_advance`].
typedef enum NfvDirection {
  NFV_DIRECTION_FORWARD = 0,
  NFV_DIRECTION_REVERSED = 1,
} NfvDirection;

// Opaque solver state.
typedef struct NfvSolver NfvSolver;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates a solver for a named preset on an `n x n` periodic grid, loaded
// with the preset's initial data at time 0.
//
// `flux` is one of `lxf`, `lxf-split`, `godunov`, `upwind`; `alpha` is
// ignored by the last two.
enum NfvStatus nfv_solver_new(const char *preset,
                              size_t n,
                              const char *flux,
                              double alpha,
                              double cfl,
                              struct NfvSolver **out);

// Releases a solver. Null is accepted.
void nfv_solver_free(struct NfvSolver *solver);

// Grid dimensions.
enum NfvStatus nfv_solver_shape(const struct NfvSolver *solver, size_t *n1, size_t *n2);

enum NfvStatus nfv_solver_time(const struct NfvSolver *solver, double *t);

// Copies the current cell averages (row-major, `i` fastest) into `buf`,
// which must hold exactly `n1 * n2` values.
enum NfvStatus nfv_solver_get_field(const struct NfvSolver *solver, double *buf, size_t len);

// Replaces the current state. Values must be finite.
enum NfvStatus nfv_solver_set_field(struct NfvSolver *solver,
                                    const double *buf,
                                    size_t len,
                                    double time);

// Advances the state from its current time to `t_end`.
enum NfvStatus nfv_solver_advance(struct NfvSolver *solver,
                                  double t_end,
                                  enum NfvDirection direction);

// Discrete L1 distance between the current state and the initial data.
enum NfvStatus nfv_solver_error(const struct NfvSolver *solver, double *err);

// Encrypts a preset to time `t`, decrypts, and reports the discrete L1
// reconstruction error. A negative `t` selects the preset's horizon.
enum NfvStatus nfv_encdec_error(const char *preset,
                                size_t n,
                                const char *flux,
                                double alpha,
                                double t,
                                double *err);

// Copies the calling thread's last error message into `buf` (NUL
// terminated, truncated to `len`). Returns the full message length
// without the terminator.
size_t nfv_last_error_message(char *buf, size_t len);

// Static NUL-terminated version string.
const char *nfv_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NFV_H */
