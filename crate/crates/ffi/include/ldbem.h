#ifndef LDBEM_H
#define LDBEM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LdbemStatus {
  LDBEM_STATUS_OK = 0,
  LDBEM_STATUS_NULL_POINTER = 1,
  LDBEM_STATUS_INVALID_ARGUMENT = 2,
  LDBEM_STATUS_CONFIG = 3,
  LDBEM_STATUS_MESH = 4,
  LDBEM_STATUS_NUMERICAL = 5,
  LDBEM_STATUS_IO = 6,
  LDBEM_STATUS_BUFFER_TOO_SMALL = 7,
  LDBEM_STATUS_PANIC = 8,
} LdbemStatus;

typedef enum LdbemBessel {
  LDBEM_BESSEL_J0 = 0,
  LDBEM_BESSEL_J1 = 1,
  LDBEM_BESSEL_Y0 = 2,
  LDBEM_BESSEL_Y1 = 3,
} LdbemBessel;

// Opaque mesh handle.
typedef struct LdbemMesh LdbemMesh;

// Opaque simulation handle.
typedef struct LdbemSimulation LdbemSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Length in bytes of the last error message on this thread, excluding the
// terminating NUL. Zero after a successful call.
size_t ldbem_last_error_length(void);

// Copies the last error message (NUL-terminated) into `buf`.
//
// # Safety
// `buf` must point to `len` writable bytes.
enum LdbemStatus ldbem_last_error_message(char *buf, size_t len);

// Structured rectangle mesh with edge tags left/right/bottom/top.
//
// # Safety
// `out` must be a valid pointer.
enum LdbemStatus ldbem_mesh_rectangle(size_t nx,
                                      size_t ny,
                                      double x0,
                                      double x1,
                                      double y0,
                                      double y1,
                                      struct LdbemMesh **out);

// Structured annulus mesh with edge tags inner/outer.
//
// # Safety
// `out` must be a valid pointer.
enum LdbemStatus ldbem_mesh_annulus(size_t nr,
                                    size_t ntheta,
                                    double r_in,
                                    double r_out,
                                    struct LdbemMesh **out);

// Disk mesh with edge tag "rim".
//
// # Safety
// `out` must be a valid pointer.
enum LdbemStatus ldbem_mesh_disk(size_t n_core,
                                 size_t n_ring,
                                 double radius,
                                 struct LdbemMesh **out);

// Parses a mesh from its text format.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum LdbemStatus ldbem_mesh_import(const char *text, struct LdbemMesh **out);

// # Safety
// `mesh` must be a live handle and `out` a valid pointer.
enum LdbemStatus ldbem_mesh_quad_count(const struct LdbemMesh *mesh, size_t *out);

// # Safety
// `mesh` must be a live handle and `out` a valid pointer.
enum LdbemStatus ldbem_mesh_node_count(const struct LdbemMesh *mesh, size_t *out);

// # Safety
// `mesh` must be null or a handle returned by this library, freed once.
void ldbem_mesh_free(struct LdbemMesh *mesh);

// Builds a simulation from a TOML run configuration. Relative mesh paths
// resolve against `base_dir` (the current directory when null). When
// `mesh` is not null it replaces the configured mesh.
//
// # Safety
// `config` must be a NUL-terminated string, `base_dir` null or
// NUL-terminated, `mesh` null or a live handle, `out` a valid pointer.
enum LdbemStatus ldbem_simulation_create(const char *config,
                                         const char *base_dir,
                                         const struct LdbemMesh *mesh,
                                         struct LdbemSimulation **out);

// Advances one time step. `iterations` (nullable) receives the number of
// nonlinear iterations used.
//
// # Safety
// `sim` must be a live handle; `iterations` null or valid.
enum LdbemStatus ldbem_simulation_step(struct LdbemSimulation *sim, size_t *iterations);

// Advances to `t_end`.
//
// # Safety
// `sim` must be a live handle.
enum LdbemStatus ldbem_simulation_run(struct LdbemSimulation *sim);

// # Safety
// `sim` must be a live handle and `out` a valid pointer.
enum LdbemStatus ldbem_simulation_time(const struct LdbemSimulation *sim, double *out);

// Completed and total step counts.
//
// # Safety
// `sim` must be a live handle; `done` and `total` valid pointers.
enum LdbemStatus ldbem_simulation_steps(const struct LdbemSimulation *sim,
                                        size_t *done,
                                        size_t *total);

// Number of output nodes (boundary nodes followed by cell nodes).
//
// # Safety
// `sim` must be a live handle and `out` a valid pointer.
enum LdbemStatus ldbem_simulation_node_count(const struct LdbemSimulation *sim, size_t *out);

// Copies node coordinates and values. Each buffer must hold `len` doubles,
// with `len` at least the node count. `x` and `y` may be null.
//
// # Safety
// `sim` must be a live handle; non-null buffers must hold `len` doubles.
enum LdbemStatus ldbem_simulation_values(const struct LdbemSimulation *sim,
                                         double *x,
                                         double *y,
                                         double *phi,
                                         size_t len);

// # Safety
// `sim` must be null or a handle returned by this library, freed once.
void ldbem_simulation_free(struct LdbemSimulation *sim);

// # Safety
// `out` must be a valid pointer.
enum LdbemStatus ldbem_gamma(double x, double *out);

// One-parameter Mittag-Leffler function E_alpha(z) for real z <= 0.
//
// # Safety
// `out` must be a valid pointer.
enum LdbemStatus ldbem_mittag_leffler(double alpha, double z, double *out);

// # Safety
// `out` must be a valid pointer.
enum LdbemStatus ldbem_bessel(enum LdbemBessel kind, double x, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LDBEM_H */
