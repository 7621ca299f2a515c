#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "clda/gibbs_lda.h"
#include "clda/types.h"

namespace clda {

// Where a pooled row came from.
struct Provenance {
  std::string segment_key;
  std::size_t local_index = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

// The pooled matrix U of local topics in the shared vocabulary space.
struct TopicMatrix {
  std::size_t dim = 0;
  std::vector<Vector> rows;
  std::vector<Provenance> provenance;
  // Rows removed by normalization because they were all zero.
  std::vector<Provenance> discarded;

  std::size_t size() const { return rows.size(); }
};

// Places `topic` into a length-vocab_size vector, zero for every word
// outside `local_vocab`. The topic is indexed either by position in
// `local_vocab` (size |W_s|) or by global word id (size vocab_size); when
// the two sizes coincide both readings give the same answer.
Vector align_topic(std::span<const double> topic, std::span<const WordId> local_vocab,
                   std::size_t vocab_size);

std::vector<Vector> align_to_global(const LocalTopicSet& local, std::size_t vocab_size);

// Adds epsilon to every entry.
std::vector<Vector> smooth(std::vector<Vector> rows, double epsilon);

// Scales the row to unit Euclidean norm; returns false for a zero row.
bool normalize_row(std::span<double> row);

// Normalizes every row; zero rows move to `discarded`.
TopicMatrix normalize(TopicMatrix matrix);

// align -> smooth -> normalize for each segment, concatenated in the order
// of `locals` and then by local topic index.
TopicMatrix merge_all(std::span<const LocalTopicSet> locals, std::size_t vocab_size,
                      double epsilon = 0.0, std::size_t max_threads = 1);

}  // namespace clda
