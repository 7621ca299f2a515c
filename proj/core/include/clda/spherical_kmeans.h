#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "clda/types.h"

namespace clda {

// Global topics: K unit-norm centroids plus one cluster id per pooled row.
//
// The objective is the sum over rows of the cosine distance to the assigned
// centroid. On unit vectors this is half the squared Euclidean error, and
// it is the quantity that Lloyd iterations with renormalized-mean centroids
// never increase.
struct Clustering {
  std::vector<Vector> centroids;
  std::vector<std::size_t> assignment;
  double objective = 0;
  std::size_t restarts_run = 1;
  std::size_t iterations = 0;
  // Objective after every Lloyd step of the selected run.
  std::vector<double> objective_trace;

  std::size_t k() const { return centroids.size(); }
};

struct KMeansOptions {
  std::size_t max_iters = 100;
  double tol = 1e-9;
};

enum class InitMode { kRandomTopics, kProvided };

// 1 - a.b / (|a| |b|). DomainError if either vector has zero norm.
double cosine_distance(std::span<const double> a, std::span<const double> b);

double clustering_objective(std::span<const Vector> rows, std::span<const Vector> centroids,
                            std::span<const std::size_t> assignment);

// Index of the cosine-nearest centroid, lowest id on ties.
std::size_t nearest_centroid(std::span<const double> row, std::span<const Vector> centroids);

// One assign + update pass. Rows go to their nearest centroid; each
// non-empty cluster's centroid becomes the renormalized mean of its
// members; each empty cluster is re-seeded with the row farthest from its
// own centroid (rows used for an earlier re-seed are skipped).
Clustering lloyd_step(std::span<const Vector> rows, const Clustering& current);

// Iterates lloyd_step until assignments stop changing, the objective
// improves by less than tol, or max_iters steps ran. Initial centroids are
// renormalized. ConfigError unless 1 <= k <= rows.size().
Clustering kmeans(std::span<const Vector> rows, std::size_t k, std::vector<Vector> init_centroids,
                  const KMeansOptions& options = {});

// Runs kmeans from every initialization and keeps the lowest objective
// (earliest initialization on ties).
Clustering best_of(std::span<const Vector> rows, std::size_t k,
                   std::span<const std::vector<Vector>> inits, const KMeansOptions& options = {},
                   std::size_t max_threads = 1);

// Indices of the first occurrence of every distinct row.
std::vector<std::size_t> distinct_rows(std::span<const Vector> rows);

// kRandomTopics: each restart r draws k distinct rows without replacement
// using derive_seed(seed, r). kProvided: `provided` centroids, one run.
Clustering multi_restart(std::span<const Vector> rows, std::size_t k, std::size_t restarts,
                         std::uint64_t seed, InitMode mode,
                         const KMeansOptions& options = {},
                         std::span<const Vector> provided = {}, std::size_t max_threads = 1);

}  // namespace clda
