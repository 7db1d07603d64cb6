#ifndef CURVECUR_H
#define CURVECUR_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CurvecurStatus {
  CURVECUR_STATUS_OK = 0,
  CURVECUR_STATUS_NULL_POINTER = 1,
  CURVECUR_STATUS_INVALID_UTF8 = 2,
  CURVECUR_STATUS_PARSE = 3,
  CURVECUR_STATUS_UNKNOWN_SURFACE = 4,
  CURVECUR_STATUS_NOT_HYPERBOLIC = 5,
  CURVECUR_STATUS_UNSTABLE = 6,
  CURVECUR_STATUS_BUDGET = 7,
  CURVECUR_STATUS_MISSING_AXIOM = 8,
  CURVECUR_STATUS_UNSUPPORTED = 9,
  CURVECUR_STATUS_FAILED = 10,
  CURVECUR_STATUS_PANIC = 11,
} CurvecurStatus;

typedef struct CurvecurFunctional CurvecurFunctional;

typedef struct CurvecurMultiCurve CurvecurMultiCurve;

typedef struct CurvecurRep CurvecurRep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Owned by the library.
 */
const char *curvecur_last_error(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void curvecur_string_free(char *s);

/**
 * Parses a multi-curve literal such as `"a; 1/2*aB"` on a built-in surface.
 *
 * # Safety
 * `surface` and `literal` must be valid C strings; `out` must be writable.
 */
enum CurvecurStatus curvecur_multicurve_parse(const char *surface,
                                              const char *literal,
                                              struct CurvecurMultiCurve **out);

/**
 * # Safety
 * `c` must be null or a live handle from this library.
 */
void curvecur_multicurve_free(struct CurvecurMultiCurve *c);

/**
 * Canonical text of a multi-curve; free with [`curvecur_string_free`].
 *
 * # Safety
 * `c` must be null or a live handle.
 */
char *curvecur_multicurve_to_string(const struct CurvecurMultiCurve *c);

/**
 * Built-in holonomy representation of a surface.
 *
 * # Safety
 * `surface` must be a valid C string; `out` must be writable.
 */
enum CurvecurStatus curvecur_rep_builtin(const char *surface, struct CurvecurRep **out);

/**
 * Representation from its JSON description.
 *
 * # Safety
 * `json` must be a valid C string; `out` must be writable.
 */
enum CurvecurStatus curvecur_rep_from_json(const char *json, struct CurvecurRep **out);

/**
 * # Safety
 * `r` must be null or a live handle.
 */
void curvecur_rep_free(struct CurvecurRep *r);

/**
 * Weighted hyperbolic length of a multi-curve.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum CurvecurStatus curvecur_hyperbolic_length(const struct CurvecurRep *rep,
                                               const struct CurvecurMultiCurve *curve,
                                               double *out);

/**
 * Geometric intersection number of two closed curves given as words.
 *
 * # Safety
 * `rep` must be live; `c`, `d` valid C strings; `out` writable.
 */
enum CurvecurStatus curvecur_intersection_number(const struct CurvecurRep *rep,
                                                 const char *c,
                                                 const char *d,
                                                 size_t radius,
                                                 uint64_t *out);

/**
 * Self-intersection number of a closed curve given as a word.
 *
 * # Safety
 * `rep` must be live; `c` a valid C string; `out` writable.
 */
enum CurvecurStatus curvecur_self_intersection(const struct CurvecurRep *rep,
                                               const char *c,
                                               size_t radius,
                                               uint64_t *out);

/**
 * Hyperbolic length as a functional handle.
 *
 * # Safety
 * `rep` must be live; `out` writable.
 */
enum CurvecurStatus curvecur_functional_hyperbolic_length(const struct CurvecurRep *rep,
                                                          struct CurvecurFunctional **out);

/**
 * Word length for a comma-separated generating set such as `"a,aa,b"`.
 *
 * # Safety
 * `surface` and `gens` must be valid C strings; `out` writable.
 */
enum CurvecurStatus curvecur_functional_word_length(const char *surface,
                                                    const char *gens,
                                                    struct CurvecurFunctional **out);

/**
 * Stabilization of `inner` using `n` powers. `inner` stays owned by the
 * caller.
 *
 * # Safety
 * `inner` must be live; `out` writable.
 */
enum CurvecurStatus curvecur_functional_stabilize(const struct CurvecurFunctional *inner,
                                                  size_t n,
                                                  struct CurvecurFunctional **out);

/**
 * # Safety
 * `f` must be null or a live handle.
 */
void curvecur_functional_free(struct CurvecurFunctional *f);

/**
 * Evaluates `f` on `curve`. `out_exact` may be null; otherwise it receives
 * the exact value as `"p/q"` or null for real-valued results.
 *
 * # Safety
 * Handles must be live; `out_value` writable.
 */
enum CurvecurStatus curvecur_functional_evaluate(const struct CurvecurFunctional *f,
                                                 const struct CurvecurMultiCurve *curve,
                                                 double *out_value,
                                                 char **out_exact);

/**
 * Stable value `lim f(Cⁿ)/n` of a single closed curve from `n` powers;
 * `out_tail` receives 1 when the sequence became eventually linear.
 *
 * # Safety
 * `f` must be live; `word` a valid C string; `out_value` and `out_tail`
 * writable; `out_exact` null or writable.
 */
enum CurvecurStatus curvecur_stable_value(const struct CurvecurFunctional *f,
                                          const char *word,
                                          size_t n,
                                          double *out_value,
                                          char **out_exact,
                                          int32_t *out_tail);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CURVECUR_H */
