#ifndef GRAPH_PENCIL_H
#define GRAPH_PENCIL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes mirroring the CLI exit codes.
 */
typedef enum GpStatus {
  /**
   * Success.
   */
  Ok = 0,
  /**
   * A null handle or malformed argument was passed.
   */
  Usage = 2,
  /**
   * Numerical failure (degeneracy, conditioning, non-real eigenvalues).
   */
  Numerical = 3,
  /**
   * File could not be read, written, or parsed.
   */
  Io = 4,
} GpStatus;

/**
 * Opaque undirected graph.
 */
typedef struct GpGraph GpGraph;

/**
 * Opaque SBM parameter set.
 */
typedef struct GpParams GpParams;

/**
 * Opaque inference result.
 */
typedef struct GpSolution GpSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *gp_last_error(void);

/**
 * Build a parameter set from `pi` (length `k`) and row-major `b`
 * (`k * k` entries). Returns null on validation failure.
 *
 * # Safety
 * `pi` must point to `k` doubles and `b` to `k * k` doubles.
 */
struct GpParams *gp_params_new(uintptr_t k, const double *pi, const double *b);

/**
 * Load parameters from a JSON file `{"pi": [...], "B": [[...]]}`.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string.
 */
struct GpParams *gp_params_load(const char *path);

/**
 * Number of blocks.
 *
 * # Safety
 * `params` must be a live handle from this library or null.
 */
int gp_params_k(const struct GpParams *params);

/**
 * # Safety
 * `params` must be a handle from this library, not yet freed.
 */
void gp_params_free(struct GpParams *params);

/**
 * Sample an `n`-node graph; deterministic in `seed`.
 *
 * # Safety
 * `params` must be a live handle.
 */
struct GpGraph *gp_sample(const struct GpParams *params, uintptr_t n, uint64_t seed);

/**
 * Load an edge-list file (`# n=<N>` header, one `u v` pair per line).
 *
 * # Safety
 * `path` must be a valid NUL-terminated string.
 */
struct GpGraph *gp_graph_load(const char *path);

/**
 * Write the graph as an edge list.
 *
 * # Safety
 * `graph` must be a live handle; `path` a valid NUL-terminated string.
 */
enum GpStatus gp_graph_save(const struct GpGraph *graph, const char *path);

/**
 * Node count, or -1 on a null handle.
 *
 * # Safety
 * `graph` must be a live handle or null.
 */
int gp_graph_n(const struct GpGraph *graph);

/**
 * Edge count, or -1 on a null handle.
 *
 * # Safety
 * `graph` must be a live handle or null.
 */
int gp_graph_edge_count(const struct GpGraph *graph);

/**
 * # Safety
 * `graph` must be a handle from this library, not yet freed.
 */
void gp_graph_free(struct GpGraph *graph);

/**
 * Exact model density of a glyph written in `L<l> C<c> R<r> [E]` notation.
 *
 * # Safety
 * `params` must be a live handle, `glyph` a valid string, `out` non-null.
 */
enum GpStatus gp_density(const struct GpParams *params, const char *glyph, double *out);

/**
 * Injective-homomorphism density of a glyph in an observed graph.
 *
 * # Safety
 * `graph` must be a live handle, `glyph` a valid string, `out` non-null.
 */
enum GpStatus gp_count_density(const struct GpGraph *graph, const char *glyph, double *out);

/**
 * Infer a K-block model from an observed graph. Returns null on failure
 * (degeneracy, conditioning, or budget errors; see `gp_last_error`).
 *
 * # Safety
 * `graph` must be a live handle.
 */
struct GpSolution *gp_infer(const struct GpGraph *graph, uintptr_t k, bool two_hop, bool clamp);

/**
 * Run the pipeline on exact model densities (self-consistency check).
 *
 * # Safety
 * `params` must be a live handle.
 */
struct GpSolution *gp_infer_exact(const struct GpParams *params, uintptr_t k, bool two_hop);

/**
 * Copy the recovered block proportions into `out` (length `k`).
 *
 * # Safety
 * `solution` must be a live handle and `out` point to `k` doubles.
 */
enum GpStatus gp_solution_pi(const struct GpSolution *solution, double *out, uintptr_t k);

/**
 * Copy the recovered block degrees into `out` (length `k`).
 *
 * # Safety
 * `solution` must be a live handle and `out` point to `k` doubles.
 */
enum GpStatus gp_solution_d(const struct GpSolution *solution, double *out, uintptr_t k);

/**
 * Copy the recovered connectivity matrix into `out`, row-major, `k * k`
 * entries.
 *
 * # Safety
 * `solution` must be a live handle and `out` point to `k * k` doubles.
 */
enum GpStatus gp_solution_b(const struct GpSolution *solution, double *out, uintptr_t k);

/**
 * Serialize the full solution (including diagnostics) to JSON. Free the
 * returned string with `gp_string_free`.
 *
 * # Safety
 * `solution` must be a live handle.
 */
char *gp_solution_to_json(const struct GpSolution *solution);

/**
 * # Safety
 * `solution` must be a handle from this library, not yet freed.
 */
void gp_solution_free(struct GpSolution *solution);

/**
 * # Safety
 * `s` must come from `gp_solution_to_json`, not yet freed.
 */
void gp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRAPH_PENCIL_H */
