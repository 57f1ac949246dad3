#ifndef NTMFLOW_H
#define NTMFLOW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NtmStatus {
  NTM_STATUS_OK = 0,
  NTM_STATUS_NULL_POINTER = 1,
  NTM_STATUS_INVALID_UTF8 = 2,
  NTM_STATUS_PARSE_ERROR = 3,
  NTM_STATUS_INVALID_WORD = 4,
  NTM_STATUS_INVALID_ARGUMENT = 5,
  NTM_STATUS_CAPACITY_EXCEEDED = 6,
  NTM_STATUS_PANIC = 7,
} NtmStatus;

typedef enum NtmVerdict {
  NTM_VERDICT_ACCEPT = 0,
  NTM_VERDICT_REJECT = 1,
  /**
   * The step cap was reached without a decision.
   */
  NTM_VERDICT_UNDECIDED = 2,
} NtmVerdict;

/**
 * The outcome of one decider run.
 */
typedef struct NtmDecision NtmDecision;

/**
 * A parsed machine.
 */
typedef struct NtmMachine NtmMachine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into this library from the same thread.
 */
const char *ntm_last_error(void);

/**
 * Parses a machine description. On success `*out` owns a new handle.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum NtmStatus ntm_machine_parse(const char *text, struct NtmMachine **out);

/**
 * # Safety
 * `m` must come from [`ntm_machine_parse`] and not be freed twice. NULL is ignored.
 */
void ntm_machine_free(struct NtmMachine *m);

/**
 * Runs the decider on `word`. Symbols are separated by whitespace when the
 * word contains any, otherwise each character is one symbol.
 *
 * `max_variables` bounds each linear system; 0 selects the default.
 *
 * # Safety
 * `m` must be a live machine handle, `word` a NUL-terminated string and
 * `out` a valid pointer.
 */
enum NtmStatus ntm_decide(const struct NtmMachine *m,
                          const char *word,
                          uint32_t step_cap,
                          size_t max_variables,
                          struct NtmDecision **out);

/**
 * # Safety
 * `d` must be a live decision handle.
 */
enum NtmVerdict ntm_decision_verdict(const struct NtmDecision *d);

/**
 * Sequence length at which the decider stopped.
 *
 * # Safety
 * `d` must be a live decision handle.
 */
uint32_t ntm_decision_mu(const struct NtmDecision *d);

/**
 * Line-oriented report, owned by the handle.
 *
 * # Safety
 * `d` must be a live decision handle.
 */
const char *ntm_decision_report(const struct NtmDecision *d);

/**
 * # Safety
 * `d` must come from [`ntm_decide`] and not be freed twice. NULL is ignored.
 */
void ntm_decision_free(struct NtmDecision *d);

/**
 * Breadth-first simulation up to `step_cap` steps.
 *
 * # Safety
 * `m` must be a live machine handle, `word` a NUL-terminated string and
 * `out` a valid pointer.
 */
enum NtmStatus ntm_oracle(const struct NtmMachine *m,
                          const char *word,
                          uint32_t step_cap,
                          enum NtmVerdict *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NTMFLOW_H */
