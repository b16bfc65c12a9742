#ifndef COLLAPSE_LAB_H
#define COLLAPSE_LAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Outcome of [`cl_veblen_compare`].
 */
typedef enum ClOrder {
  CL_ORDER_LESS = -1,
  CL_ORDER_EQUIVALENT = 0,
  CL_ORDER_GREATER = 1,
  CL_ORDER_INCOMPARABLE = 2,
} ClOrder;

/**
 * Result of every fallible call.
 */
typedef enum ClStatus {
  CL_STATUS_OK = 0,
  CL_STATUS_NULL_POINTER = 1,
  CL_STATUS_INVALID_UTF8 = 2,
  CL_STATUS_PARSE = 3,
  CL_STATUS_SIZE_LIMIT = 4,
  CL_STATUS_NOT_WELL_FOUNDED = 5,
  CL_STATUS_INVALID_INPUT = 6,
  CL_STATUS_DOMAIN = 7,
  CL_STATUS_PANIC = 8,
} ClStatus;

/**
 * A hereditarily finite set.
 */
typedef struct ClSet ClSet;

/**
 * A finite labelled tree.
 */
typedef struct ClTree ClTree;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message of the last failed call on this thread, or null.  The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *cl_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cl_version(void);

/**
 * # Safety
 * `s` is null or was returned by this library and not yet freed.
 */
void cl_string_free(char *s);

/**
 * Parse a set expression (`{}`, `{a b}`, `#n`).
 *
 * # Safety
 * `expr` is a NUL-terminated string; `out` is writable.
 */
enum ClStatus cl_set_parse(const char *expr, struct ClSet **out);

/**
 * The von Neumann ordinal `n`.
 *
 * # Safety
 * `out` is writable.
 */
enum ClStatus cl_set_ordinal(uintptr_t n, struct ClSet **out);

/**
 * The level `V_n`.
 *
 * # Safety
 * `out` is writable.
 */
enum ClStatus cl_set_v_level(uintptr_t n, struct ClSet **out);

/**
 * # Safety
 * `set` is null or a live handle, not used afterwards.
 */
void cl_set_free(struct ClSet *set);

/**
 * Canonical text of a set; release with [`cl_string_free`].
 *
 * # Safety
 * `set` is a live handle; `out` is writable.
 */
enum ClStatus cl_set_to_string(const struct ClSet *set, char **out);

/**
 * Number of members.
 *
 * # Safety
 * `set` is a live handle; `out` is writable.
 */
enum ClStatus cl_set_len(const struct ClSet *set, uintptr_t *out);

/**
 * Von Neumann rank.
 *
 * # Safety
 * `set` is a live handle; `out` is writable.
 */
enum ClStatus cl_set_rank(const struct ClSet *set, uintptr_t *out);

/**
 * Extensional equality.
 *
 * # Safety
 * `a` and `b` are live handles; `out` is writable.
 */
enum ClStatus cl_set_equal(const struct ClSet *a, const struct ClSet *b, bool *out);

/**
 * `x ∈ a`.
 *
 * # Safety
 * `a` and `x` are live handles; `out` is writable.
 */
enum ClStatus cl_set_contains(const struct ClSet *a, const struct ClSet *x, bool *out);

/**
 * Transitive closure.
 *
 * # Safety
 * `set` is a live handle; `out` is writable.
 */
enum ClStatus cl_set_transitive_closure(const struct ClSet *set, struct ClSet **out);

/**
 * Powerset.
 *
 * # Safety
 * `set` is a live handle; `out` is writable.
 */
enum ClStatus cl_set_powerset(const struct ClSet *set, struct ClSet **out);

/**
 * Decide `(a,∈) ⊨ f[σ]`.  `assign` lists the values of x0, x1, … as set
 * expressions.  With `via_collapse` the answer comes from the collapse of
 * the truth-value trees (the formula is first put in negation normal
 * form), otherwise from direct evaluation.
 *
 * # Safety
 * `model` is a live handle; `formula` and `assign` are NUL-terminated
 * strings; `out` is writable.
 */
enum ClStatus cl_formula_holds(const struct ClSet *model,
                               const char *formula,
                               const char *assign,
                               bool via_collapse,
                               bool *out);

/**
 * Parse a tree from its JSON form (a list of label paths).
 *
 * # Safety
 * `json` is a NUL-terminated string; `out` is writable.
 */
enum ClStatus cl_tree_from_json(const char *json, struct ClTree **out);

/**
 * # Safety
 * `tree` is null or a live handle, not used afterwards.
 */
void cl_tree_free(struct ClTree *tree);

/**
 * Number of nodes.
 *
 * # Safety
 * `tree` is a live handle; `out` is writable.
 */
enum ClStatus cl_tree_node_count(const struct ClTree *tree, uint64_t *out);

/**
 * The collapse of the root.
 *
 * # Safety
 * `tree` is a live handle; `out` is writable.
 */
enum ClStatus cl_tree_collapse(const struct ClTree *tree, struct ClSet **out);

/**
 * The maximal bisimulation as JSON (a list of node-path pairs); release
 * with [`cl_string_free`].
 *
 * # Safety
 * `tree` is a live handle; `out` is writable.
 */
enum ClStatus cl_tree_maximal_bisimulation(const struct ClTree *tree, char **out);

/**
 * Compare two Veblen terms over Λ = the finite ordinal `lambda` with
 * level bound `alpha`.
 *
 * # Safety
 * `t` and `s` are NUL-terminated strings; `out` is writable.
 */
enum ClStatus cl_veblen_compare(uint32_t alpha,
                                uint64_t lambda,
                                const char *t,
                                const char *s,
                                enum ClOrder *out);

/**
 * Evaluate a primitive recursive program (s-expression) on a list of set
 * expressions.  A non-negative `omega` binds the constant `omega` to that
 * finite ordinal.
 *
 * # Safety
 * `program` and `args` are NUL-terminated strings; `out` is writable.
 */
enum ClStatus cl_prs_eval(const char *program, const char *args, int64_t omega, struct ClSet **out);

/**
 * The constructible level `L_n(base)`.
 *
 * # Safety
 * `base` is a live handle; `out` is writable.
 */
enum ClStatus cl_constructible_level(const struct ClSet *base, uintptr_t n, struct ClSet **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COLLAPSE_LAB_H */
