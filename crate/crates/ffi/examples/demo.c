/* Selects the most likely forbidden facts of a small prediction. */
#include <stdio.h>
#include "ngpkit.h"

#define CHECK(call)                                                        \
  do {                                                                     \
    NgpStatus s_ = (call);                                                 \
    if (s_ != NGP_STATUS_OK) {                                             \
      fprintf(stderr, "%s failed (%d): %s\n", #call, (int)s_,              \
              ngp_last_error_message());                                   \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  NgpVocabulary *vocab = NULL;
  NgpTheory *theory = NULL;
  NgpPrediction *pred = NULL;
  const NgpFact allowed[] = {{0, 0, 0}, {1, 1, 1}};
  const double subjects[] = {0.6, 0.4};
  const double predicates[] = {0.7, 0.3};
  const double objects[] = {0.2, 0.8};
  NgpFact picked[4];
  NgpFact best;
  size_t n = 0;
  bool found = false;
  uint64_t count = 0;
  double p = 0.0;

  CHECK(ngp_vocabulary_from_sizes(2, 2, 2, &vocab));
  CHECK(ngp_theory_fact_complement(vocab, allowed, 2, &theory));
  CHECK(ngp_theory_ic_count(theory, &count));
  CHECK(ngp_prediction_new(1, subjects, 2, predicates, 2, objects, 2, &pred));
  CHECK(ngp_greedy_select(pred, 0, theory, 2, picked, 4, &n));
  CHECK(ngp_wmc_ic_conjunction(pred, 0, picked, n, &p));
  CHECK(ngp_itr_project(pred, 0, theory, &best, &found));

  printf("ics %llu\n", (unsigned long long)count);
  for (size_t i = 0; i < n; i++) {
    printf("selected %u %u %u\n", picked[i].subject, picked[i].predicate, picked[i].object);
  }
  printf("wmc %.6f\n", p);
  printf("projected %d %u %u %u\n", (int)found, best.subject, best.predicate, best.object);

  if (ngp_prediction_new(1, subjects, 2, predicates, 2, objects, 2, NULL) != NGP_STATUS_NULL_POINTER) {
    return 1;
  }
  printf("error %s\n", ngp_last_error_message());

  ngp_prediction_free(pred);
  ngp_theory_free(theory);
  ngp_vocabulary_free(vocab);
  return 0;
}
