#include "clda/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "clda/errors.h"

namespace clda {

double MatchReport::mean_jaccard() const {
  if (pairs.empty()) return 0;
  double total = 0;
  for (const auto& p : pairs) total += p.jaccard;
  return total / static_cast<double>(pairs.size());
}

double MatchReport::mean_dice() const {
  if (pairs.empty()) return 0;
  double total = 0;
  for (const auto& p : pairs) total += p.dice;
  return total / static_cast<double>(pairs.size());
}

double perplexity(std::span<const Vector> doc_token_probs) {
  double log_sum = 0;
  std::size_t tokens = 0;
  for (std::size_t d = 0; d < doc_token_probs.size(); ++d) {
    const auto& probs = doc_token_probs[d];
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (!(probs[i] > 0)) throw ZeroProbabilityError(d, i);
      log_sum += std::log(probs[i]);
    }
    tokens += probs.size();
  }
  if (tokens == 0) throw DomainError("perplexity needs at least one scored token");
  return std::exp(-log_sum / static_cast<double>(tokens));
}

WordSet top_words(std::span<const double> probs, std::size_t n) {
  if (n < 1) throw ConfigError("top-n size must be at least 1");
  std::vector<WordId> candidates;
  for (std::size_t w = 0; w < probs.size(); ++w) {
    if (probs[w] > 0) candidates.push_back(static_cast<WordId>(w));
  }
  const std::size_t take = std::min(n, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                    candidates.end(), [&](WordId a, WordId b) {
                      if (probs[a] != probs[b]) return probs[a] > probs[b];
                      return a < b;
                    });
  candidates.resize(take);
  std::sort(candidates.begin(), candidates.end());

  WordSet set;
  set.words = std::move(candidates);
  set.n = n;
  return set;
}

namespace {

std::size_t intersection_size(const WordSet& a, const WordSet& b) {
  std::size_t count = 0;
  auto ia = a.words.begin();
  auto ib = b.words.begin();
  while (ia != a.words.end() && ib != b.words.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

}  // namespace

double dice(const WordSet& a, const WordSet& b) {
  const std::size_t total = a.words.size() + b.words.size();
  if (total == 0) throw DomainError("dice coefficient of two empty sets");
  return 2.0 * static_cast<double>(intersection_size(a, b)) / static_cast<double>(total);
}

double jaccard(const WordSet& a, const WordSet& b) {
  const std::size_t common = intersection_size(a, b);
  const std::size_t united = a.words.size() + b.words.size() - common;
  if (united == 0) throw DomainError("jaccard index of two empty sets");
  return static_cast<double>(common) / static_cast<double>(united);
}

MatchReport greedy_match(std::span<const WordSet> sets_a, std::span<const WordSet> sets_b) {
  struct Candidate {
    std::size_t a;
    std::size_t b;
    double jaccard;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(sets_a.size() * sets_b.size());
  for (std::size_t a = 0; a < sets_a.size(); ++a) {
    for (std::size_t b = 0; b < sets_b.size(); ++b) {
      candidates.push_back({a, b, jaccard(sets_a[a], sets_b[b])});
    }
  }
  // Sorting by (score desc, a asc, b asc) and skipping pairs whose members
  // are taken visits exactly the pairs the repeated-argmax rule would pick.
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    if (x.jaccard != y.jaccard) return x.jaccard > y.jaccard;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });

  std::vector<bool> used_a(sets_a.size(), false);
  std::vector<bool> used_b(sets_b.size(), false);
  const std::size_t limit = std::min(sets_a.size(), sets_b.size());
  MatchReport report;
  for (const auto& c : candidates) {
    if (report.pairs.size() == limit) break;
    if (used_a[c.a] || used_b[c.b]) continue;
    used_a[c.a] = true;
    used_b[c.b] = true;
    report.pairs.push_back({c.a, c.b, c.jaccard, dice(sets_a[c.a], sets_b[c.b])});
  }
  return report;
}

Vector global_topic_mean(std::span<const Vector> topics) {
  if (topics.empty()) throw DomainError("mean of zero topics");
  Vector mean(topics.front().size(), 0.0);
  for (const auto& topic : topics) {
    if (topic.size() != mean.size()) throw CorruptionError("topics differ in dimension");
    for (std::size_t w = 0; w < mean.size(); ++w) mean[w] += topic[w];
  }
  const double total = std::accumulate(mean.begin(), mean.end(), 0.0);
  if (!(total > 0)) throw DomainError("mean topic has no mass");
  for (double& v : mean) v /= total;
  return mean;
}

}  // namespace clda
