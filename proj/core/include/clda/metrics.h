#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "clda/types.h"

namespace clda {

// Representative word set of a topic: its top-n words, stored ascending.
struct WordSet {
  std::vector<WordId> words;
  std::size_t n = 0;
  std::string label;
  std::size_t topic = 0;
};

struct MatchPair {
  std::size_t a = 0;
  std::size_t b = 0;
  double jaccard = 0;
  double dice = 0;
};

// One-to-one matching, best pair first.
struct MatchReport {
  std::vector<MatchPair> pairs;

  double mean_jaccard() const;
  double mean_dice() const;
};

// exp(-sum_d sum_w log P(w|d) / sum_d N_d). doc_token_probs[d] holds P(w|d)
// for every scored token of document d. Throws ZeroProbabilityError on the
// first non-positive probability and DomainError when there is no token.
double perplexity(std::span<const Vector> doc_token_probs);

// The n highest-probability words with positive probability; ties go to the
// lower word id.
WordSet top_words(std::span<const double> probs, std::size_t n);

// Sorensen-Dice: 2|A n B| / (|A| + |B|). DomainError when both are empty.
double dice(const WordSet& a, const WordSet& b);

// Jaccard: |A n B| / |A u B|. DomainError when both are empty.
double jaccard(const WordSet& a, const WordSet& b);

// Repeatedly pairs the two unassigned sets with the highest Jaccard index
// (ties: lowest index in `sets_a`, then in `sets_b`) until one side runs
// out. The report is sorted by descending Jaccard, selection order on ties.
MatchReport greedy_match(std::span<const WordSet> sets_a, std::span<const WordSet> sets_b);

// Elementwise mean of the topics, rescaled to sum to one.
Vector global_topic_mean(std::span<const Vector> topics);

}  // namespace clda
