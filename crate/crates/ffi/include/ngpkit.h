#ifndef NGPKIT_H
#define NGPKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum NgpDomain {
  NGP_DOMAIN_SUBJECT = 0,
  NGP_DOMAIN_PREDICATE = 1,
  NGP_DOMAIN_OBJECT = 2,
} NgpDomain;

typedef enum NgpLoss {
  /**
   * Semantic loss.
   */
  NGP_LOSS_SL = 0,
  /**
   * DL2 fuzzy loss.
   */
  NGP_LOSS_DL2 = 1,
} NgpLoss;

/**
 * Result code of every fallible call.
 */
typedef enum NgpStatus {
  NGP_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  NGP_STATUS_NULL_POINTER = 1,
  /**
   * An argument was out of range or inconsistent.
   */
  NGP_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A size limit of the library was exceeded.
   */
  NGP_STATUS_CAPACITY = 3,
  /**
   * A file or string could not be parsed.
   */
  NGP_STATUS_PARSE = 4,
  /**
   * A file could not be read or written.
   */
  NGP_STATUS_IO = 5,
  /**
   * A computation produced a non-finite or undefined value.
   */
  NGP_STATUS_NUMERIC = 6,
  /**
   * The output buffer is too small; the required length was written.
   */
  NGP_STATUS_BUFFER_TOO_SMALL = 7,
  /**
   * A Rust panic was caught at the boundary.
   */
  NGP_STATUS_PANIC = 8,
} NgpStatus;

/**
 * Opaque per-slot activation vectors.
 */
typedef struct NgpPrediction NgpPrediction;

/**
 * Opaque theory of negative integrity constraints.
 */
typedef struct NgpTheory NgpTheory;

/**
 * Opaque term vocabulary.
 */
typedef struct NgpVocabulary NgpVocabulary;

/**
 * A `predicate(subject, object)` atom by term ids.
 */
typedef struct NgpFact {
  uint32_t subject;
  uint32_t predicate;
  uint32_t object;
} NgpFact;

/**
 * A fact with its likelihood under one slot of a prediction.
 */
typedef struct NgpScoredFact {
  struct NgpFact fact;
  double likelihood;
} NgpScoredFact;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ngp_version(void);

/**
 * Message of the last failed call on this thread, or null if the last call
 * succeeded. Valid until the next call into the library on this thread.
 */
const char *ngp_last_error_message(void);

/**
 * Vocabulary with generated names `s0..`, `p0..`, `o0..`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum NgpStatus ngp_vocabulary_from_sizes(size_t n_subjects,
                                         size_t n_predicates,
                                         size_t n_objects,
                                         struct NgpVocabulary **out_vocab);

/**
 * Loads a sectioned vocabulary file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out_vocab` a valid pointer.
 */
enum NgpStatus ngp_vocabulary_load(const char *path, struct NgpVocabulary **out_vocab);

/**
 * # Safety
 * `vocab` must be null or a handle from this library not yet freed.
 */
void ngp_vocabulary_free(struct NgpVocabulary *vocab);

/**
 * Writes the subject, predicate and object counts to `out_sizes[0..3]`.
 *
 * # Safety
 * `vocab` must be a live handle and `out_sizes` point to three `size_t`.
 */
enum NgpStatus ngp_vocabulary_sizes(const struct NgpVocabulary *vocab, size_t *out_sizes);

/**
 * Id of `name` in `domain`. Unknown names give `NGP_STATUS_INVALID_ARGUMENT`.
 *
 * # Safety
 * `vocab` must be a live handle, `name` a NUL-terminated string and `out_id`
 * a valid pointer.
 */
enum NgpStatus ngp_vocabulary_lookup(const struct NgpVocabulary *vocab,
                                     enum NgpDomain domain,
                                     const char *name,
                                     uint32_t *out_id);

/**
 * Loads a theory file against `vocab`.
 *
 * # Safety
 * `vocab` must be a live handle, `path` a NUL-terminated string and
 * `out_theory` a valid pointer.
 */
enum NgpStatus ngp_theory_load(const struct NgpVocabulary *vocab,
                               const char *path,
                               struct NgpTheory **out_theory);

/**
 * Theory forbidding every fact that is not among `positives`.
 *
 * # Safety
 * `vocab` must be a live handle, `positives` point to `n_positives` facts
 * (or be null when zero) and `out_theory` be a valid pointer.
 */
enum NgpStatus ngp_theory_fact_complement(const struct NgpVocabulary *vocab,
                                          const struct NgpFact *positives,
                                          size_t n_positives,
                                          struct NgpTheory **out_theory);

/**
 * Theory forbidding exactly `forbidden`.
 *
 * # Safety
 * As for [`ngp_theory_fact_complement`].
 */
enum NgpStatus ngp_theory_explicit(const struct NgpVocabulary *vocab,
                                   const struct NgpFact *forbidden,
                                   size_t n_forbidden,
                                   struct NgpTheory **out_theory);

/**
 * Theory completing the sparse term pairs of a knowledge graph read from a
 * `s<TAB>p<TAB>o` file; pairs with at most `kappa` facts are completed.
 *
 * # Safety
 * `vocab` must be a live handle, `kg_path` a NUL-terminated string and
 * `out_theory` a valid pointer.
 */
enum NgpStatus ngp_theory_kg_complement(const struct NgpVocabulary *vocab,
                                        const char *kg_path,
                                        uint32_t kappa,
                                        struct NgpTheory **out_theory);

/**
 * Writes the theory to `path`, replacing any existing file.
 *
 * # Safety
 * `theory` must be a live handle and `path` a NUL-terminated string.
 */
enum NgpStatus ngp_theory_save(const struct NgpTheory *theory, const char *path);

/**
 * # Safety
 * `theory` must be null or a handle from this library not yet freed.
 */
void ngp_theory_free(struct NgpTheory *theory);

/**
 * Whether the theory contains the constraint `¬fact`.
 *
 * # Safety
 * `theory` must be a live handle and `out_contains` a valid pointer.
 */
enum NgpStatus ngp_theory_contains(const struct NgpTheory *theory,
                                   struct NgpFact fact,
                                   bool *out_contains);

/**
 * Number of constraints in the theory.
 *
 * # Safety
 * `theory` must be a live handle and `out_count` a valid pointer.
 */
enum NgpStatus ngp_theory_ic_count(const struct NgpTheory *theory, uint64_t *out_count);

/**
 * Prediction over `n_slots` slots. Each domain array holds the slots back
 * to back: `subjects` has `n_slots * n_subjects` entries, slot 0 first.
 * Activations must lie in `[0, 1]`.
 *
 * # Safety
 * Each array must hold `n_slots` times its domain size and `out_prediction`
 * must be a valid pointer.
 */
enum NgpStatus ngp_prediction_new(size_t n_slots,
                                  const double *subjects,
                                  size_t n_subjects,
                                  const double *predicates,
                                  size_t n_predicates,
                                  const double *objects,
                                  size_t n_objects,
                                  struct NgpPrediction **out_prediction);

/**
 * # Safety
 * `prediction` must be null or a handle from this library not yet freed.
 */
void ngp_prediction_free(struct NgpPrediction *prediction);

/**
 * Probability that no constraint `¬ics[i]` is violated in `slot`.
 *
 * # Safety
 * `prediction` must be a live handle, `ics` point to `n_ics` facts and
 * `out_value` be a valid pointer.
 */
enum NgpStatus ngp_wmc_ic_conjunction(const struct NgpPrediction *prediction,
                                      size_t slot,
                                      const struct NgpFact *ics,
                                      size_t n_ics,
                                      double *out_value);

/**
 * Loss of the conjunction of the constraints `¬ics[i]` in `slot`. The set
 * must be non-empty.
 *
 * # Safety
 * As for [`ngp_wmc_ic_conjunction`].
 */
enum NgpStatus ngp_loss_of_ic_set(enum NgpLoss loss,
                                  const struct NgpPrediction *prediction,
                                  size_t slot,
                                  const struct NgpFact *ics,
                                  size_t n_ics,
                                  double *out_value);

/**
 * The `rho` most likely facts of `slot` that the theory forbids, in
 * descending likelihood. Fewer are returned when the fact space runs out.
 * The prediction's domain sizes must match the theory's vocabulary.
 *
 * # Safety
 * `prediction` and `theory` must be live handles, `out_ics` hold `capacity`
 * facts and `out_len` be a valid pointer.
 */
enum NgpStatus ngp_greedy_select(const struct NgpPrediction *prediction,
                                 size_t slot,
                                 const struct NgpTheory *theory,
                                 size_t rho,
                                 struct NgpFact *out_ics,
                                 size_t capacity,
                                 size_t *out_len);

/**
 * Most likely fact of `slot` that violates no constraint. `out_found` is
 * false when the theory forbids every fact.
 *
 * # Safety
 * `prediction` and `theory` must be live handles; the out-pointers must be
 * valid.
 */
enum NgpStatus ngp_itr_project(const struct NgpPrediction *prediction,
                               size_t slot,
                               const struct NgpTheory *theory,
                               struct NgpFact *out_fact,
                               bool *out_found);

/**
 * The `k` most likely facts of `slot` in descending order.
 *
 * # Safety
 * `prediction` must be a live handle, `out_facts` hold `capacity` entries
 * and `out_len` be a valid pointer.
 */
enum NgpStatus ngp_topk_facts(const struct NgpPrediction *prediction,
                              size_t slot,
                              size_t k,
                              struct NgpScoredFact *out_facts,
                              size_t capacity,
                              size_t *out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NGPKIT_H */
