#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "clda/corpus.h"
#include "clda/types.h"

namespace clda {

// Forward-samples a corpus from the LDA generative model with known
// ("planted") topics. Topic k puts all of its mass on its own block of the
// vocabulary with weights proportional to 1 / (rank + 1)^decay, so topics
// are disjoint and each has a well-defined ranking of its words.
struct PlantedCorpusSpec {
  std::size_t vocab_size = 500;
  std::size_t num_topics = 6;
  std::size_t num_segments = 8;
  std::size_t num_documents = 2000;
  // Document lengths are uniform in [doc_length / 2, 3 * doc_length / 2].
  std::size_t doc_length = 80;
  double doc_alpha = 0.2;
  double decay = 1.0;
  std::uint64_t seed = 1;
  // Optional per-segment list of topics that may appear there; empty means
  // every topic is active everywhere.
  std::vector<std::vector<std::size_t>> active_topics;
};

struct PlantedCorpus {
  Corpus corpus;
  // num_topics rows over the vocabulary, each summing to one.
  std::vector<Vector> topics;
};

PlantedCorpus make_planted_corpus(const PlantedCorpusSpec& spec);

}  // namespace clda
