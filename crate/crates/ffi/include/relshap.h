#ifndef RELSHAP_H
#define RELSHAP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RsEvaluator {
  RS_EVALUATOR_NAIVE = 0,
  RS_EVALUATOR_COMPILED = 1,
} RsEvaluator;

typedef enum RsExactMethod {
  RS_EXACT_METHOD_SUBSET = 0,
  RS_EXACT_METHOD_PERMUTATION = 1,
  RS_EXACT_METHOD_BANZHAF = 2,
} RsExactMethod;

/**
 * Result code of every fallible call.
 */
typedef enum RsStatus {
  RS_STATUS_OK = 0,
  RS_STATUS_NULL_ARGUMENT = 1,
  RS_STATUS_INVALID_UTF8 = 2,
  RS_STATUS_IO = 3,
  RS_STATUS_PARSE = 4,
  RS_STATUS_INVALID = 5,
  RS_STATUS_CAP_EXCEEDED = 6,
  RS_STATUS_PANIC = 7,
} RsStatus;

/**
 * A query bound to an instance, with its player set and evaluator.
 */
typedef struct RsContext RsContext;

/**
 * A loaded database instance.
 */
typedef struct RsInstance RsInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Owned by the
 * library; valid until the next call on this thread.
 */
const char *rs_last_error(void);

/**
 * Loads a schema JSON file and the table files next to it.
 *
 * # Safety
 * `schema_path` must be a valid NUL-terminated string; `out` must be writable.
 */
enum RsStatus rs_instance_load(const char *schema_path, struct RsInstance **out);

/**
 * Number of tuples in the instance.
 *
 * # Safety
 * `inst` must be a live handle from [`rs_instance_load`].
 */
enum RsStatus rs_instance_tuple_count(const struct RsInstance *inst, size_t *out);

/**
 * Resolves `relation#row` or a numeric id to a tuple id.
 *
 * # Safety
 * `inst` must be a live handle; `tuple_ref` a valid string; `out` writable.
 */
enum RsStatus rs_instance_resolve(const struct RsInstance *inst,
                                  const char *tuple_ref,
                                  uint32_t *out);

/**
 * # Safety
 * `inst` must be NULL or a handle not yet freed.
 */
void rs_instance_free(struct RsInstance *inst);

/**
 * Binds a query (JSON text) to an instance. The context keeps its own
 * reference to the instance, which may be freed independently.
 *
 * # Safety
 * `inst` must be a live handle; `query_json` a valid string; `out` writable.
 */
enum RsStatus rs_context_new(const struct RsInstance *inst,
                             const char *query_json,
                             enum RsEvaluator evaluator,
                             struct RsContext **out);

/**
 * Number of players (endogenous lineage tuples).
 *
 * # Safety
 * `ctx` must be a live handle; `out` writable.
 */
enum RsStatus rs_context_player_count(const struct RsContext *ctx, size_t *out);

/**
 * Query value with every player present.
 *
 * # Safety
 * `ctx` must be a live handle; `out` writable.
 */
enum RsStatus rs_context_full_value(const struct RsContext *ctx, double *out);

/**
 * Exact value of `target` by enumeration. Fails with
 * `RS_STATUS_CAP_EXCEEDED` when the game is too large.
 *
 * # Safety
 * `ctx` must be a live handle; `out` writable.
 */
enum RsStatus rs_exact(const struct RsContext *ctx,
                       uint32_t target,
                       enum RsExactMethod method,
                       double *out);

/**
 * Sampled estimate. `config_json` holds at least `method` and `budget`
 * (e.g. `{"method":"arss","budget":1000,"seed":7}`). The full report is
 * written to `report_json` as a new string when that pointer is non-NULL.
 *
 * # Safety
 * `ctx` must be a live handle; `config_json` a valid string; `value` writable;
 * `report_json` NULL or writable.
 */
enum RsStatus rs_estimate(const struct RsContext *ctx,
                          uint32_t target,
                          const char *config_json,
                          double *value,
                          char **report_json);

/**
 * # Safety
 * `ctx` must be NULL or a handle not yet freed.
 */
void rs_context_free(struct RsContext *ctx);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void rs_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RELSHAP_H */
