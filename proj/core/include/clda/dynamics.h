#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clda/gibbs_lda.h"
#include "clda/merge.h"
#include "clda/metrics.h"
#include "clda/spherical_kmeans.h"

namespace clda {

// How much of a segment each local topic accounts for.
enum class MassWeighting {
  kTokens,     // sum_j theta_j[i] * N_j
  kDocuments,  // sum_j theta_j[i]
};

struct CompositionEntry {
  std::size_t local_index = 0;
  double fraction = 0;
  WordSet top_words;
  // The same words ordered by descending probability.
  std::vector<WordId> ranked_words;
};

struct TopicLifetime {
  // Segment indices (into the locals order) with no member local topic.
  std::vector<std::size_t> absent_segments;
  // First and last segment with at least one member; empty if none.
  std::optional<std::size_t> birth;
  std::optional<std::size_t> death;
};

struct DynamicsReport {
  std::vector<std::string> segments;
  // segments x K, rows sum to one for segments with mass.
  std::vector<Vector> proportions;
  // compositions[s][g]
  std::vector<std::vector<std::vector<CompositionEntry>>> compositions;
  std::vector<TopicLifetime> lifetimes;
};

std::vector<double> segment_topic_mass(const LocalTopicSet& local,
                                       MassWeighting weighting = MassWeighting::kTokens);

// Cluster of every local topic: result[s][i] is the cluster of local topic
// i of locals[s], or nullopt when the topic was discarded during merging.
std::vector<std::vector<std::optional<std::size_t>>> cluster_of_local_topics(
    const TopicMatrix& matrix, const Clustering& clustering, std::span<const LocalTopicSet> locals);

// proportions[s][g] = mass of segment s's topics in cluster g / mass of all
// of segment s's clustered topics.
std::vector<Vector> global_proportions(const TopicMatrix& matrix, const Clustering& clustering,
                                       std::span<const LocalTopicSet> locals,
                                       MassWeighting weighting = MassWeighting::kTokens);

std::vector<CompositionEntry> local_composition(const TopicMatrix& matrix,
                                                const Clustering& clustering,
                                                std::span<const LocalTopicSet> locals,
                                                std::size_t global_topic, std::size_t segment,
                                                std::size_t n_words,
                                                MassWeighting weighting = MassWeighting::kTokens);

std::vector<TopicLifetime> birth_death(const TopicMatrix& matrix, const Clustering& clustering,
                                       std::span<const LocalTopicSet> locals);

DynamicsReport build_dynamics(const TopicMatrix& matrix, const Clustering& clustering,
                              std::span<const LocalTopicSet> locals, std::size_t n_words,
                              MassWeighting weighting = MassWeighting::kTokens);

}  // namespace clda
