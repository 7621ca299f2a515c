#include "clda/merge.h"

#include <cmath>
#include <iostream>

#include "clda/errors.h"
#include "clda/parallel.h"

namespace clda {

Vector align_topic(std::span<const double> topic, std::span<const WordId> local_vocab,
                   std::size_t vocab_size) {
  for (WordId w : local_vocab) {
    if (w >= vocab_size) {
      throw CorruptionError("local vocabulary word id " + std::to_string(w) +
                            " is outside the global vocabulary of size " +
                            std::to_string(vocab_size));
    }
  }
  Vector aligned(vocab_size, 0.0);
  if (topic.size() == local_vocab.size()) {
    for (std::size_t i = 0; i < local_vocab.size(); ++i) aligned[local_vocab[i]] = topic[i];
  } else if (topic.size() == vocab_size) {
    for (WordId w : local_vocab) aligned[w] = topic[w];
  } else {
    throw CorruptionError("topic of dimension " + std::to_string(topic.size()) +
                          " matches neither the local (" + std::to_string(local_vocab.size()) +
                          ") nor the global (" + std::to_string(vocab_size) + ") vocabulary");
  }
  return aligned;
}

std::vector<Vector> align_to_global(const LocalTopicSet& local, std::size_t vocab_size) {
  std::vector<Vector> rows;
  rows.reserve(local.topics.size());
  for (const auto& topic : local.topics) {
    rows.push_back(align_topic(topic, local.local_vocab, vocab_size));
  }
  return rows;
}

std::vector<Vector> smooth(std::vector<Vector> rows, double epsilon) {
  if (!(epsilon >= 0)) throw ConfigError("epsilon must be non-negative");
  if (epsilon == 0) return rows;
  for (auto& row : rows) {
    for (double& v : row) v += epsilon;
  }
  return rows;
}

bool normalize_row(std::span<double> row) {
  double sq = 0;
  for (double v : row) sq += v * v;
  if (!(sq > 0)) return false;
  const double norm = std::sqrt(sq);
  for (double& v : row) v /= norm;
  return true;
}

TopicMatrix normalize(TopicMatrix matrix) {
  TopicMatrix out;
  out.dim = matrix.dim;
  out.discarded = std::move(matrix.discarded);
  for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
    if (normalize_row(matrix.rows[r])) {
      out.rows.push_back(std::move(matrix.rows[r]));
      out.provenance.push_back(std::move(matrix.provenance[r]));
    } else {
      std::clog << "warning: dropping all-zero topic " << matrix.provenance[r].local_index
                << " of segment '" << matrix.provenance[r].segment_key << "'\n";
      out.discarded.push_back(std::move(matrix.provenance[r]));
    }
  }
  return out;
}

TopicMatrix merge_all(std::span<const LocalTopicSet> locals, std::size_t vocab_size,
                      double epsilon, std::size_t max_threads) {
  if (locals.empty()) throw ConfigError("merge needs at least one segment");
  std::vector<TopicMatrix> parts(locals.size());
  parallel_for(locals.size(), max_threads, [&](std::size_t s) {
    TopicMatrix part;
    part.dim = vocab_size;
    part.rows = smooth(align_to_global(locals[s], vocab_size), epsilon);
    for (std::size_t i = 0; i < part.rows.size(); ++i) {
      part.provenance.push_back({locals[s].segment_key, i});
    }
    parts[s] = normalize(std::move(part));
  });

  TopicMatrix merged;
  merged.dim = vocab_size;
  for (auto& part : parts) {
    for (std::size_t r = 0; r < part.rows.size(); ++r) {
      merged.rows.push_back(std::move(part.rows[r]));
      merged.provenance.push_back(std::move(part.provenance[r]));
    }
    for (auto& p : part.discarded) merged.discarded.push_back(std::move(p));
  }
  return merged;
}

}  // namespace clda
