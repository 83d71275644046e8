#ifndef DENDRITE_H
#define DENDRITE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of one condition of the equicontinuity check.
 */
typedef enum DdCondition {
  DD_CONDITION_HOLDS = 0,
  DD_CONDITION_FAILS = 1,
  DD_CONDITION_UNDETERMINED = 2,
} DdCondition;

/**
 * Result codes. The numeric values match the CLI exit codes where both exist.
 */
typedef enum DdStatus {
  DD_STATUS_OK = 0,
  DD_STATUS_INVALID_INPUT = 1,
  DD_STATUS_RESOURCE = 3,
  DD_STATUS_NULL_POINTER = 4,
  DD_STATUS_PANIC = 5,
} DdStatus;

/**
 * Opaque handle to a loaded system.
 */
typedef struct DdSystem DdSystem;

typedef struct DdVerdict {
  enum DdCondition cond1;
  enum DdCondition cond2;
  enum DdCondition cond3;
  /**
   * The three conditions do not contradict each other.
   */
  bool consistent;
  /**
   * The equivalence is not claimed for this system, so disagreement is expected.
   */
  bool fan_mode;
} DdVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a system from configuration text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum DdStatus dd_system_from_config(const char *text, struct DdSystem **out);

/**
 * Builds a named example such as `"tent"` or `"shift_star:6"`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a valid pointer.
 */
enum DdStatus dd_system_from_example(const char *spec, struct DdSystem **out);

/**
 * Releases a system. Null is ignored.
 *
 * # Safety
 * `sys` must come from this library and not be used afterwards.
 */
void dd_system_free(struct DdSystem *sys);

/**
 * Number of vertices of the underlying tree, or 0 for a null handle.
 *
 * # Safety
 * `sys` must be null or a live handle.
 */
size_t dd_system_vertex_count(const struct DdSystem *sys);

/**
 * Number of edges of the underlying tree, or 0 for a null handle.
 *
 * # Safety
 * `sys` must be null or a live handle.
 */
size_t dd_system_edge_count(const struct DdSystem *sys);

/**
 * Runs the three-condition check with the system's own parameters.
 *
 * # Safety
 * `sys` must be a live handle and `out` a valid pointer.
 */
enum DdStatus dd_theorem_check(const struct DdSystem *sys, struct DdVerdict *out);

/**
 * Equicontinuity defect at `delta = delta_num / delta_den`, written as a
 * reduced fraction. Fails with `Resource` if it does not fit in 64 bits.
 *
 * # Safety
 * `sys` must be a live handle and `num`, `den` valid pointers.
 */
enum DdStatus dd_defect(const struct DdSystem *sys,
                        int64_t delta_num,
                        int64_t delta_den,
                        int64_t *num,
                        int64_t *den);

/**
 * Runs a comma-separated list of analyses and returns the JSON report
 * without timings. Free the result with `dd_string_free`.
 *
 * # Safety
 * `sys` must be a live handle, `analyses` a NUL-terminated string and
 * `out` a valid pointer.
 */
enum DdStatus dd_report_json(const struct DdSystem *sys, const char *analyses, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void dd_string_free(char *s);

/**
 * Message for the last failed call on this thread, or an empty string.
 * The pointer stays valid until the next call into the library.
 */
const char *dd_last_error(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* DENDRITE_H */
