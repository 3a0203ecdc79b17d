#ifndef VARMORREY_H
#define VARMORREY_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. `VM_OK` is zero; library errors keep their kind.
 */
typedef enum VmStatus {
  VM_OK = 0,
  VM_ARGUMENT = 1,
  VM_DOMAIN = 2,
  VM_NUMERIC = 3,
  VM_CONVERGENCE = 4,
  VM_PRECONDITION = 5,
  VM_INVARIANT = 6,
  VM_CONFIG = 7,
  /**
   * A study ran but one of its assertions failed; its report is still
   * returned.
   */
  VM_ASSERTION = 8,
  VM_NULL_POINTER = 9,
  VM_INVALID_UTF8 = 10,
  VM_PANIC = 11,
} VmStatus;

/**
 * Variable exponent sampled on a grid.
 */
typedef struct VmExponent VmExponent;

/**
 * Real field sampled on a grid.
 */
typedef struct VmField VmField;

/**
 * Uniform grid on a box, optionally masked.
 */
typedef struct VmGrid VmGrid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *vm_last_error(void);

/**
 * Grid with spacing `h` on `[lo_i, hi_i]`, `extent = [lo_0, hi_0, lo_1, hi_1]`
 * for `dim` axes (1 or 2).
 *
 * # Safety
 * `extent` must point to `2 * dim` doubles and `out` to writable storage.
 */
enum VmStatus vm_grid_new(double h, const double *extent, size_t dim, struct VmGrid **out);

/**
 * # Safety
 * `grid` must come from [`vm_grid_new`] and not be used afterwards.
 */
void vm_grid_free(struct VmGrid *grid);

/**
 * Number of cells (members or not), or 0 for a null handle.
 *
 * # Safety
 * `grid` must be null or a live handle.
 */
size_t vm_grid_len(const struct VmGrid *grid);

/**
 * Center of `cell` into `out_xy` (one or two doubles, by dimension).
 *
 * # Safety
 * `grid` must be a live handle and `out_xy` must hold `dim` doubles.
 */
enum VmStatus vm_grid_center(const struct VmGrid *grid, size_t cell, double *out_xy);

/**
 * Field from `len == vm_grid_len(grid)` samples in cell order.
 *
 * # Safety
 * `values` must point to `len` doubles; `grid` must be live.
 */
enum VmStatus vm_field_new(const struct VmGrid *grid,
                           const double *values,
                           size_t len,
                           struct VmField **out);

/**
 * Copies the samples into `buf`, which must hold `len` doubles.
 *
 * # Safety
 * `field` must be live and `buf` writable for `len` doubles.
 */
enum VmStatus vm_field_values(const struct VmField *field, double *buf, size_t len);

/**
 * # Safety
 * `field` must come from this library and not be used afterwards.
 */
void vm_field_free(struct VmField *field);

/**
 * Exponent from samples in cell order, with its value at infinity.
 *
 * # Safety
 * `values` must point to `len` doubles; `grid` must be live.
 */
enum VmStatus vm_exponent_new(const struct VmGrid *grid,
                              const double *values,
                              size_t len,
                              double p_infinity,
                              struct VmExponent **out);

/**
 * Constant exponent `p0`.
 *
 * # Safety
 * `grid` must be live and `out` writable.
 */
enum VmStatus vm_exponent_constant(const struct VmGrid *grid, double p0, struct VmExponent **out);

/**
 * # Safety
 * `p` must come from this library and not be used afterwards.
 */
void vm_exponent_free(struct VmExponent *p);

/**
 * Luxemburg norm of `f·weight` over the whole grid; `weight` may be null.
 *
 * # Safety
 * All non-null handles must be live and built on `grid`.
 */
enum VmStatus vm_norm(const struct VmField *f,
                      const struct VmExponent *p,
                      const struct VmGrid *grid,
                      const struct VmField *weight,
                      double *out);

/**
 * Riesz potential `I^α f` as a new field.
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
enum VmStatus vm_riesz(const struct VmField *f,
                       double alpha,
                       const struct VmGrid *grid,
                       struct VmField **out);

/**
 * Fractional maximal function `M^α f` over the given radii (`α = 0` for
 * the Hardy-Littlewood maximal function).
 *
 * # Safety
 * `radii` must point to `n_radii` doubles; handles live; `out` writable.
 */
enum VmStatus vm_maximal(const struct VmField *f,
                         double alpha,
                         const struct VmGrid *grid,
                         const double *radii,
                         size_t n_radii,
                         struct VmField **out);

/**
 * Weight constant `[ω]_{A_{p,q}}` over centers × radii. `centers` is flat
 * with `grid` dimension coordinates per point.
 *
 * # Safety
 * Arrays must hold the stated counts; handles live; `out` writable.
 */
enum VmStatus vm_apq(const struct VmField *omega,
                     const struct VmExponent *p,
                     const struct VmExponent *q,
                     const struct VmGrid *grid,
                     const double *centers,
                     size_t n_coords,
                     const double *radii,
                     size_t n_radii,
                     double *out);

/**
 * Runs a harness command (`"norm"`, `"study-bounded"`, …) on a TOML config
 * and returns the JSON report in `*out`, to be released with
 * [`vm_string_free`]. A failed study assertion returns `VmAssertion` with
 * the report still written.
 *
 * # Safety
 * `command` and `config_toml` must be NUL-terminated; `out` writable.
 */
enum VmStatus vm_run_study(const char *command, const char *config_toml, char **out);

/**
 * # Safety
 * `s` must come from [`vm_run_study`] and not be used afterwards.
 */
void vm_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VARMORREY_H */
