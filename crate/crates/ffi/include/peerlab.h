#ifndef PEERLAB_H
#define PEERLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum PeerlabStatus {
  PEERLAB_STATUS_OK = 0,
  PEERLAB_STATUS_NULL_POINTER = 1,
  PEERLAB_STATUS_INVALID_UTF8 = 2,
  PEERLAB_STATUS_INVALID_CONFIG = 3,
  PEERLAB_STATUS_RUNTIME = 4,
  PEERLAB_STATUS_BUFFER_TOO_SMALL = 5,
  PEERLAB_STATUS_OUT_OF_RANGE = 6,
  PEERLAB_STATUS_PANIC = 7,
} PeerlabStatus;

/**
 * A validated experiment configuration.
 */
typedef struct PeerlabConfig PeerlabConfig;

/**
 * A live peer group that can be stepped round by round.
 */
typedef struct PeerlabGroup PeerlabGroup;

/**
 * The finished result of one seed of one configuration.
 */
typedef struct PeerlabRun PeerlabRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next peerlab call on the same thread.
 */
const char *peerlab_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *peerlab_version(void);

/**
 * Temperature `tau0 * exp(-decay * epoch)`.
 *
 * # Safety
 * `out` must be null or point to writable memory for one double.
 */
enum PeerlabStatus peerlab_temperature(double tau0, double decay, uint64_t epoch, double *out);

/**
 * Boltzmann selection probabilities of `n` weights at temperature `tau`,
 * written to `out_probs` (`n` doubles).
 *
 * # Safety
 * `weights` and `out_probs` must each point to `n` doubles.
 */
enum PeerlabStatus peerlab_boltzmann(const double *weights,
                                     size_t n,
                                     double tau,
                                     double *out_probs);

/**
 * Parses and validates a JSON experiment configuration. Missing fields
 * take their defaults, so `"{}"` is valid.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum PeerlabStatus peerlab_config_from_json(const char *json, struct PeerlabConfig **out);

/**
 * Serializes a configuration, all defaults filled in, as JSON.
 *
 * # Safety
 * `config` must come from [`peerlab_config_from_json`]; `buf` must hold
 * `len` bytes. The text is NUL-terminated and `*out_len` includes the NUL.
 */
enum PeerlabStatus peerlab_config_to_json(const struct PeerlabConfig *config,
                                          char *buf,
                                          size_t len,
                                          size_t *out_len);

/**
 * # Safety
 * `config` must be null or come from [`peerlab_config_from_json`], and is
 * invalid afterwards.
 */
void peerlab_config_free(struct PeerlabConfig *config);

/**
 * Trains the configured group for one seed (no files written).
 *
 * # Safety
 * `config` must be a live config handle; `out` must be writable.
 */
enum PeerlabStatus peerlab_run(const struct PeerlabConfig *config,
                               uint64_t seed,
                               struct PeerlabRun **out);

/**
 * # Safety
 * `run` must be null or come from [`peerlab_run`], and is invalid afterwards.
 */
void peerlab_run_free(struct PeerlabRun *run);

/**
 * Mean over learners of their average reward over time.
 *
 * # Safety
 * `run` must be a live run handle; `out` must be writable.
 */
enum PeerlabStatus peerlab_run_score(const struct PeerlabRun *run, double *out);

/**
 * Number of group members (learners and frozen advisors).
 *
 * # Safety
 * `run` must be a live run handle; `out` must be writable.
 */
enum PeerlabStatus peerlab_run_member_count(const struct PeerlabRun *run, size_t *out);

/**
 * Evaluation steps of the run's checkpoints.
 *
 * # Safety
 * `run` must be a live run handle; `buf` must hold `len` values.
 */
enum PeerlabStatus peerlab_run_steps(const struct PeerlabRun *run,
                                     uint64_t *buf,
                                     size_t len,
                                     size_t *out_len);

/**
 * Solo evaluation curve of member `agent`, one value per checkpoint.
 *
 * # Safety
 * `run` must be a live run handle; `buf` must hold `len` values.
 */
enum PeerlabStatus peerlab_run_curve(const struct PeerlabRun *run,
                                     size_t agent,
                                     double *buf,
                                     size_t len,
                                     size_t *out_len);

/**
 * Final acceptance counts, row-major `n x n`: entry `i * n + j` counts how
 * often member `i` executed member `j`'s suggestion.
 *
 * # Safety
 * `run` must be a live run handle; `buf` must hold `len` values.
 */
enum PeerlabStatus peerlab_run_acceptance(const struct PeerlabRun *run,
                                          uint64_t *buf,
                                          size_t len,
                                          size_t *out_len);

/**
 * Builds the configured group for `seed` without running it.
 *
 * # Safety
 * `config` must be a live config handle; `out` must be writable.
 */
enum PeerlabStatus peerlab_group_new(const struct PeerlabConfig *config,
                                     uint64_t seed,
                                     struct PeerlabGroup **out);

/**
 * # Safety
 * `group` must be null or come from [`peerlab_group_new`], and is invalid
 * afterwards.
 */
void peerlab_group_free(struct PeerlabGroup *group);

/**
 * Advances every learner by `rounds` environment steps.
 *
 * # Safety
 * `group` must be a live group handle.
 */
enum PeerlabStatus peerlab_group_advance(struct PeerlabGroup *group, uint64_t rounds);

/**
 * Rounds completed so far.
 *
 * # Safety
 * `group` must be a live group handle; `out` must be writable.
 */
enum PeerlabStatus peerlab_group_rounds(const struct PeerlabGroup *group, uint64_t *out);

/**
 * Current acceptance counts, row-major `n x n` as in
 * [`peerlab_run_acceptance`].
 *
 * # Safety
 * `group` must be a live group handle; `buf` must hold `len` values.
 */
enum PeerlabStatus peerlab_group_acceptance(const struct PeerlabGroup *group,
                                            uint64_t *buf,
                                            size_t len,
                                            size_t *out_len);

/**
 * Trust value member `advisee` holds for `advisor`.
 *
 * # Safety
 * `group` must be a live group handle; `out` must be writable.
 */
enum PeerlabStatus peerlab_group_trust(const struct PeerlabGroup *group,
                                       size_t advisee,
                                       size_t advisor,
                                       double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PEERLAB_H */
