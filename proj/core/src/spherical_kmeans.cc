#include "clda/spherical_kmeans.h"

#include <cmath>
#include <limits>
#include <map>

#include "clda/errors.h"
#include "clda/merge.h"
#include "clda/parallel.h"
#include "clda/rng.h"

namespace clda {

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("cosine distance of vectors of unequal length");
  double dot = 0;
  double na = 0;
  double nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (!(na > 0) || !(nb > 0)) throw DomainError("cosine distance of a zero vector");
  return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

double clustering_objective(std::span<const Vector> rows, std::span<const Vector> centroids,
                            std::span<const std::size_t> assignment) {
  double total = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    total += cosine_distance(rows[r], centroids[assignment[r]]);
  }
  return total;
}

std::size_t nearest_centroid(std::span<const double> row, std::span<const Vector> centroids) {
  std::size_t best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = cosine_distance(row, centroids[c]);
    if (d < best_distance) {
      best_distance = d;
      best = c;
    }
  }
  return best;
}

Clustering lloyd_step(std::span<const Vector> rows, const Clustering& current) {
  const std::size_t K = current.centroids.size();
  Clustering next;
  next.restarts_run = current.restarts_run;
  next.iterations = current.iterations + 1;
  next.objective_trace = current.objective_trace;
  next.assignment.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    next.assignment[r] = nearest_centroid(rows[r], current.centroids);
  }

  const std::size_t dim = rows.empty() ? 0 : rows.front().size();
  // The cosine-optimal centroid is the direction of the sum of unit rows,
  // so each row is weighted by the inverse of its norm.
  std::vector<Vector> sums(K, Vector(dim, 0.0));
  std::vector<std::size_t> members(K, 0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double norm = 0;
    for (double v : rows[r]) norm += v * v;
    const double inv = 1.0 / std::sqrt(norm);
    auto& sum = sums[next.assignment[r]];
    for (std::size_t i = 0; i < dim; ++i) sum[i] += rows[r][i] * inv;
    ++members[next.assignment[r]];
  }

  next.centroids.resize(K);
  std::vector<std::size_t> empty;
  for (std::size_t c = 0; c < K; ++c) {
    if (members[c] > 0 && normalize_row(sums[c])) {
      next.centroids[c] = std::move(sums[c]);
    } else if (members[c] > 0) {
      // Members cancel out exactly; keep the previous direction.
      next.centroids[c] = current.centroids[c];
    } else {
      empty.push_back(c);
    }
  }

  if (!empty.empty()) {
    std::vector<double> fit(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      fit[r] = cosine_distance(rows[r], next.centroids[next.assignment[r]]);
    }
    std::vector<bool> used(rows.size(), false);
    for (std::size_t c : empty) {
      std::size_t worst = rows.size();
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (used[r]) continue;
        if (worst == rows.size() || fit[r] > fit[worst]) worst = r;
      }
      if (worst == rows.size()) {
        next.centroids[c] = current.centroids[c];
        continue;
      }
      used[worst] = true;
      next.centroids[c] = rows[worst];
      normalize_row(next.centroids[c]);
    }
  }

  next.objective = clustering_objective(rows, next.centroids, next.assignment);
  next.objective_trace.push_back(next.objective);
  return next;
}

Clustering kmeans(std::span<const Vector> rows, std::size_t k, std::vector<Vector> init_centroids,
                  const KMeansOptions& options) {
  if (k < 1 || k > rows.size()) {
    throw ConfigError("number of clusters " + std::to_string(k) + " must be in [1, " +
                      std::to_string(rows.size()) + "]");
  }
  if (init_centroids.size() != k) {
    throw ConfigError("expected " + std::to_string(k) + " initial centroids, got " +
                      std::to_string(init_centroids.size()));
  }
  for (auto& c : init_centroids) {
    if (c.size() != rows.front().size()) throw ConfigError("initial centroid has wrong dimension");
    if (!normalize_row(c)) throw DomainError("initial centroid is a zero vector");
  }

  Clustering state;
  state.centroids = std::move(init_centroids);
  state.objective = std::numeric_limits<double>::infinity();

  const std::size_t max_iters = std::max<std::size_t>(1, options.max_iters);
  for (std::size_t it = 0; it < max_iters; ++it) {
    Clustering next = lloyd_step(rows, state);
    const bool unchanged = !state.assignment.empty() && next.assignment == state.assignment;
    const double improvement = state.objective - next.objective;
    state = std::move(next);
    if (unchanged || improvement < options.tol) break;
  }
  return state;
}

Clustering best_of(std::span<const Vector> rows, std::size_t k,
                   std::span<const std::vector<Vector>> inits, const KMeansOptions& options,
                   std::size_t max_threads) {
  if (inits.empty()) throw ConfigError("at least one initialization is required");
  std::vector<Clustering> runs(inits.size());
  parallel_for(inits.size(), max_threads,
               [&](std::size_t r) { runs[r] = kmeans(rows, k, inits[r], options); });

  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].objective < runs[best].objective) best = r;
  }
  Clustering result = std::move(runs[best]);
  result.restarts_run = inits.size();
  return result;
}

std::vector<std::size_t> distinct_rows(std::span<const Vector> rows) {
  std::map<Vector, std::size_t> seen;
  std::vector<std::size_t> indices;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (seen.emplace(rows[r], r).second) indices.push_back(r);
  }
  return indices;
}

Clustering multi_restart(std::span<const Vector> rows, std::size_t k, std::size_t restarts,
                         std::uint64_t seed, InitMode mode, const KMeansOptions& options,
                         std::span<const Vector> provided, std::size_t max_threads) {
  if (mode == InitMode::kProvided) {
    std::vector<std::vector<Vector>> inits{std::vector<Vector>(provided.begin(), provided.end())};
    return best_of(rows, k, inits, options, 1);
  }
  if (restarts < 1) throw ConfigError("restarts must be at least 1");
  const auto candidates = distinct_rows(rows);
  if (k < 1 || k > candidates.size()) {
    throw ConfigError("number of clusters " + std::to_string(k) + " exceeds the " +
                      std::to_string(candidates.size()) + " distinct topics");
  }

  std::vector<std::vector<Vector>> inits(restarts);
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(seed, r));
    std::vector<std::size_t> pool = candidates;
    // Partial Fisher-Yates: the first k entries are a uniform k-subset.
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
      inits[r].push_back(rows[pool[i]]);
    }
  }
  return best_of(rows, k, inits, options, max_threads);
}

}  // namespace clda
