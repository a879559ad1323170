#ifndef AWAIRE_H
#define AWAIRE_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum AwaireStatus {
  AWAIRE_STATUS_OK = 0,
  AWAIRE_STATUS_NULL_POINTER = 1,
  /**
   * Malformed ballot file.
   */
  AWAIRE_STATUS_PARSE = 2,
  /**
   * An argument or configuration value is out of range.
   */
  AWAIRE_STATUS_INVALID_ARGUMENT = 3,
  /**
   * The audit already reached a decision or saw every ballot.
   */
  AWAIRE_STATUS_CLOSED = 4,
  /**
   * A caller-provided buffer is too small.
   */
  AWAIRE_STATUS_BUFFER_TOO_SMALL = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  AWAIRE_STATUS_INTERNAL = 6,
} AwaireStatus;

typedef enum AwaireScheme {
  AWAIRE_SCHEME_LINEAR = 0,
  AWAIRE_SCHEME_QUADRATIC = 1,
  AWAIRE_SCHEME_LARGEST = 2,
  AWAIRE_SCHEME_FIXED = 3,
} AwaireScheme;

typedef enum AwaireDecision {
  AWAIRE_DECISION_ONGOING = 0,
  AWAIRE_DECISION_CERTIFIED = 1,
  AWAIRE_DECISION_FULL_COUNT_NEEDED = 2,
} AwaireDecision;

/**
 * A live audit.
 */
typedef struct AwaireAudit AwaireAudit;

/**
 * A parsed or generated contest.
 */
typedef struct AwaireContest AwaireContest;

typedef struct AwaireConfig {
  /**
   * Risk limit, in (0, 1).
   */
  double alpha;
  enum AwaireScheme scheme;
  /**
   * Draws between weight updates.
   */
  uint32_t update_every;
  double mu0;
  double eta0;
  uint32_t d;
  size_t max_candidates;
} AwaireConfig;

typedef struct AwaireSimSummary {
  size_t n_reps;
  double mean_sample_size;
  double certification_rate;
} AwaireSimSummary;

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *awaire_last_error(void);

/**
 * Fills `out` with the default configuration.
 *
 * # Safety
 * `out` must be NULL or valid for writes.
 */
enum AwaireStatus awaire_config_default(struct AwaireConfig *out);

/**
 * Parses a UTF-8 ballot file of `len` bytes. `aggregated` selects the
 * `ranking,count` row format.
 *
 * # Safety
 * `data` must be valid for `len` bytes and `out` valid for writes.
 */
enum AwaireStatus awaire_contest_parse(const uint8_t *data,
                                       size_t len,
                                       bool aggregated,
                                       struct AwaireContest **out);

/**
 * Builds the pathological six-candidate contest with margin parameter `m`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum AwaireStatus awaire_contest_pathological(double m, struct AwaireContest **out);

/**
 * # Safety
 * `contest` must be NULL or a handle not yet freed.
 */
void awaire_contest_free(struct AwaireContest *contest);

/**
 * # Safety
 * `contest` must be a live handle.
 */
size_t awaire_contest_num_candidates(const struct AwaireContest *contest);

/**
 * # Safety
 * `contest` must be a live handle.
 */
size_t awaire_contest_num_ballots(const struct AwaireContest *contest);

/**
 * Index of the tabulated winner.
 *
 * # Safety
 * `contest` must be a live handle and `out` valid for writes.
 */
enum AwaireStatus awaire_contest_winner(const struct AwaireContest *contest, uint8_t *out);

/**
 * Copies the name of candidate `id`, NUL-terminated, into `buf` of `cap`
 * bytes. `needed` receives the required size including the terminator.
 *
 * # Safety
 * `contest` must be a live handle, `buf` valid for `cap` bytes (or NULL
 * when `cap` is 0) and `needed` NULL or valid for writes.
 */
enum AwaireStatus awaire_contest_candidate_name(const struct AwaireContest *contest,
                                                uint8_t id,
                                                char *buf,
                                                size_t cap,
                                                size_t *needed);

/**
 * Writes the elimination order (winner last) into `out`, which must hold
 * `awaire_contest_num_candidates` entries.
 *
 * # Safety
 * `contest` must be a live handle and `out` valid for `cap` writes.
 */
enum AwaireStatus awaire_contest_elimination_order(const struct AwaireContest *contest,
                                                   uint8_t *out,
                                                   size_t cap);

/**
 * Starts an audit of `population` ballots among `num_candidates`
 * candidates. `config` may be NULL for the defaults.
 *
 * # Safety
 * `config` must be NULL or valid for reads, `out` valid for writes.
 */
enum AwaireStatus awaire_audit_new(size_t num_candidates,
                                   uint8_t reported_winner,
                                   size_t population,
                                   const struct AwaireConfig *config,
                                   struct AwaireAudit **out);

/**
 * # Safety
 * `audit` must be NULL or a handle not yet freed.
 */
void awaire_audit_free(struct AwaireAudit *audit);

/**
 * Feeds the next sampled ballot, given as `len` candidate indices in
 * preference order (`len` may be 0 for a blank ballot).
 *
 * # Safety
 * `audit` must be a live handle, `ranking` valid for `len` reads (or NULL
 * when `len` is 0) and `decision` NULL or valid for writes.
 */
enum AwaireStatus awaire_audit_observe(struct AwaireAudit *audit,
                                       const uint8_t *ranking,
                                       size_t len,
                                       enum AwaireDecision *decision);

/**
 * # Safety
 * `audit` must be a live handle.
 */
enum AwaireDecision awaire_audit_decision(const struct AwaireAudit *audit);

/**
 * Ballots observed so far.
 *
 * # Safety
 * `audit` must be a live handle.
 */
size_t awaire_audit_t(const struct AwaireAudit *audit);

/**
 * Number of alternative elimination orders under test.
 *
 * # Safety
 * `audit` must be a live handle.
 */
size_t awaire_audit_num_orders(const struct AwaireAudit *audit);

/**
 * Alt-orders not yet rejected.
 *
 * # Safety
 * `audit` must be a live handle.
 */
size_t awaire_audit_remaining(const struct AwaireAudit *audit);

/**
 * Progress of alt-order `index`: `ln E_t` (possibly infinite) and whether
 * it has been rejected.
 *
 * # Safety
 * `audit` must be a live handle; `log_e` and `rejected` NULL or valid for
 * writes.
 */
enum AwaireStatus awaire_audit_order(const struct AwaireAudit *audit,
                                     size_t index,
                                     double *log_e,
                                     bool *rejected);

/**
 * Writes alt-order `index` (winner last) into `out` of `cap` entries.
 *
 * # Safety
 * `audit` must be a live handle and `out` valid for `cap` writes.
 */
enum AwaireStatus awaire_audit_order_sequence(const struct AwaireAudit *audit,
                                              size_t index,
                                              uint8_t *out,
                                              size_t cap);

/**
 * Replays `n_reps` audits of `contest` with `reported_winner` over seeded
 * random sampling orders. `sample_sizes`, when not NULL, receives one
 * entry per trial.
 *
 * # Safety
 * `contest` must be a live handle, `config` NULL or valid for reads,
 * `out` valid for writes and `sample_sizes` NULL or valid for `n_reps`
 * writes.
 */
enum AwaireStatus awaire_simulate(const struct AwaireContest *contest,
                                  uint8_t reported_winner,
                                  size_t n_reps,
                                  uint64_t seed,
                                  const struct AwaireConfig *config,
                                  struct AwaireSimSummary *out,
                                  size_t *sample_sizes);

#endif  /* AWAIRE_H */
