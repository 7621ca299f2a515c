#include "clda/dynamics.h"

#include <algorithm>
#include <unordered_map>

#include "clda/errors.h"

namespace clda {

std::vector<double> segment_topic_mass(const LocalTopicSet& local, MassWeighting weighting) {
  std::vector<double> mass(local.num_topics(), 0.0);
  for (std::size_t j = 0; j < local.doc_mixtures.size(); ++j) {
    const double weight = weighting == MassWeighting::kTokens
                              ? static_cast<double>(local.doc_lengths.at(j))
                              : 1.0;
    const auto& theta = local.doc_mixtures[j];
    for (std::size_t i = 0; i < mass.size(); ++i) mass[i] += theta[i] * weight;
  }
  return mass;
}

std::vector<std::vector<std::optional<std::size_t>>> cluster_of_local_topics(
    const TopicMatrix& matrix, const Clustering& clustering,
    std::span<const LocalTopicSet> locals) {
  if (clustering.assignment.size() != matrix.size()) {
    throw CorruptionError("clustering covers " + std::to_string(clustering.assignment.size()) +
                          " rows but the merged matrix has " + std::to_string(matrix.size()));
  }
  std::unordered_map<std::string, std::size_t> segment_index;
  std::vector<std::vector<std::optional<std::size_t>>> clusters(locals.size());
  for (std::size_t s = 0; s < locals.size(); ++s) {
    segment_index.emplace(locals[s].segment_key, s);
    clusters[s].resize(locals[s].num_topics());
  }
  for (std::size_t r = 0; r < matrix.size(); ++r) {
    const auto& p = matrix.provenance[r];
    auto it = segment_index.find(p.segment_key);
    if (it == segment_index.end() || p.local_index >= clusters[it->second].size()) {
      throw CorruptionError("merged row (" + p.segment_key + ", " +
                            std::to_string(p.local_index) + ") matches no local topic");
    }
    clusters[it->second][p.local_index] = clustering.assignment[r];
  }
  return clusters;
}

std::vector<Vector> global_proportions(const TopicMatrix& matrix, const Clustering& clustering,
                                       std::span<const LocalTopicSet> locals,
                                       MassWeighting weighting) {
  const auto clusters = cluster_of_local_topics(matrix, clustering, locals);
  const std::size_t K = clustering.k();
  std::vector<Vector> proportions(locals.size(), Vector(K, 0.0));
  for (std::size_t s = 0; s < locals.size(); ++s) {
    const auto mass = segment_topic_mass(locals[s], weighting);
    double total = 0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
      if (!clusters[s][i]) continue;
      proportions[s][*clusters[s][i]] += mass[i];
      total += mass[i];
    }
    if (total > 0) {
      for (double& p : proportions[s]) p /= total;
    }
  }
  return proportions;
}

std::vector<CompositionEntry> local_composition(const TopicMatrix& matrix,
                                                const Clustering& clustering,
                                                std::span<const LocalTopicSet> locals,
                                                std::size_t global_topic, std::size_t segment,
                                                std::size_t n_words, MassWeighting weighting) {
  const auto clusters = cluster_of_local_topics(matrix, clustering, locals);
  const auto mass = segment_topic_mass(locals[segment], weighting);
  std::vector<CompositionEntry> entries;
  double total = 0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (clusters[segment][i] != global_topic) continue;
    CompositionEntry entry;
    entry.local_index = i;
    entry.fraction = mass[i];
    entry.top_words = top_words(locals[segment].topics[i], n_words);
    entry.top_words.label = locals[segment].segment_key;
    entry.top_words.topic = i;
    entry.ranked_words = entry.top_words.words;
    const auto& topic = locals[segment].topics[i];
    std::stable_sort(entry.ranked_words.begin(), entry.ranked_words.end(),
                     [&](WordId a, WordId b) { return topic[a] > topic[b]; });
    entries.push_back(std::move(entry));
    total += mass[i];
  }
  for (auto& e : entries) {
    e.fraction = total > 0 ? e.fraction / total : 1.0 / static_cast<double>(entries.size());
  }
  return entries;
}

std::vector<TopicLifetime> birth_death(const TopicMatrix& matrix, const Clustering& clustering,
                                       std::span<const LocalTopicSet> locals) {
  const auto clusters = cluster_of_local_topics(matrix, clustering, locals);
  const std::size_t K = clustering.k();
  std::vector<std::vector<bool>> present(K, std::vector<bool>(locals.size(), false));
  for (std::size_t s = 0; s < locals.size(); ++s) {
    for (const auto& g : clusters[s]) {
      if (g) present[*g][s] = true;
    }
  }
  std::vector<TopicLifetime> lifetimes(K);
  for (std::size_t g = 0; g < K; ++g) {
    for (std::size_t s = 0; s < locals.size(); ++s) {
      if (!present[g][s]) {
        lifetimes[g].absent_segments.push_back(s);
        continue;
      }
      if (!lifetimes[g].birth) lifetimes[g].birth = s;
      lifetimes[g].death = s;
    }
  }
  return lifetimes;
}

DynamicsReport build_dynamics(const TopicMatrix& matrix, const Clustering& clustering,
                              std::span<const LocalTopicSet> locals, std::size_t n_words,
                              MassWeighting weighting) {
  DynamicsReport report;
  for (const auto& local : locals) report.segments.push_back(local.segment_key);
  report.proportions = global_proportions(matrix, clustering, locals, weighting);
  report.compositions.resize(locals.size());
  for (std::size_t s = 0; s < locals.size(); ++s) {
    report.compositions[s].resize(clustering.k());
    for (std::size_t g = 0; g < clustering.k(); ++g) {
      report.compositions[s][g] =
          local_composition(matrix, clustering, locals, g, s, n_words, weighting);
    }
  }
  report.lifetimes = birth_death(matrix, clustering, locals);
  return report;
}

}  // namespace clda
