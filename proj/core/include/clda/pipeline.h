#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clda/corpus.h"
#include "clda/dynamics.h"
#include "clda/gibbs_lda.h"
#include "clda/merge.h"
#include "clda/metrics.h"
#include "clda/spherical_kmeans.h"

namespace clda {

enum class InputFormat { kText, kBagOfWords };

// Every knob of an end-to-end run. Parsed from `key = value` lines; the
// same keys are accepted as `--key value` on the command line.
struct PipelineConfig {
  std::filesystem::path input;
  InputFormat format = InputFormat::kText;
  std::filesystem::path vocab;      // required for bag-of-words input
  std::filesystem::path stopwords;  // optional, one word per line
  std::size_t min_count = 1;
  double min_doc_fraction = 0.0;
  SegmentOrder segment_order = SegmentOrder::kLexicographic;

  std::size_t local_topics = 10;   // L
  std::size_t global_topics = 10;  // K
  std::optional<double> alpha;     // default 50 / number of topics
  double beta = 0.01;
  std::size_t iterations = 500;
  std::size_t shards = 1;
  std::size_t fold_in_iterations = 20;

  double epsilon = 0.0;

  std::size_t restarts = 10;
  std::size_t max_iters = 100;
  double tol = 1e-9;
  InitMode init_mode = InitMode::kRandomTopics;
  std::size_t init_iterations = 50;  // full-corpus LDA used by init_mode=provided

  double holdout_fraction = 0.2;
  std::size_t top_n = 20;
  // Full-corpus LDA reference for the evaluation match table; 0 disables.
  std::size_t reference_iterations = 500;
  // External topic file to match against instead of the full-corpus LDA.
  std::filesystem::path reference_topics;
  MassWeighting mass_weighting = MassWeighting::kTokens;

  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::filesystem::path output = "clda_out";

  static const std::vector<std::string>& keys();

  // Throws ConfigError for an unknown key or unparsable value.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;

  // Reads `key = value` lines; '#' starts a comment.
  static PipelineConfig from_file(const std::filesystem::path& path);

  void validate() const;

  SamplerConfig sampler_config(std::size_t num_topics, std::size_t iterations,
                               std::uint64_t seed) const;
};

enum class Stage { kIngest, kTrain, kMerge, kCluster, kEvaluate, kReport };

std::string_view stage_name(Stage stage);
std::optional<Stage> parse_stage(std::string_view name);
const std::vector<Stage>& all_stages();

// Runs exactly one stage against the artifacts in config.output. Failures
// are rethrown as StageError carrying the stage name.
void run_stage(const PipelineConfig& config, Stage stage);

// ingest -> train -> merge -> cluster -> evaluate -> report.
void run_pipeline(const PipelineConfig& config);

// Artifacts written by the stages, relative to the output directory.
namespace artifacts {
inline constexpr const char* kVocab = "vocab.txt";
inline constexpr const char* kSegments = "segments.txt";
inline constexpr const char* kTrain = "train.bow";
inline constexpr const char* kTest = "test.bow";
inline constexpr const char* kIngestStats = "ingest.txt";
inline constexpr const char* kSegmentDir = "segments";
inline constexpr const char* kTopics = "topics.tsv";
inline constexpr const char* kMixtures = "mixtures.tsv";
inline constexpr const char* kTopicCounts = "topic_counts.tsv";
inline constexpr const char* kDocCounts = "doc_counts.tsv";
inline constexpr const char* kMerged = "merged.tsv";
inline constexpr const char* kDiscarded = "merged_discarded.tsv";
inline constexpr const char* kCentroids = "centroids.tsv";
inline constexpr const char* kAssignments = "assignments.tsv";
inline constexpr const char* kClustering = "clustering.txt";
inline constexpr const char* kInitTopics = "init_topics.tsv";
inline constexpr const char* kReference = "reference_topics.tsv";
inline constexpr const char* kEval = "eval.txt";
inline constexpr const char* kProportions = "proportions.csv";
inline constexpr const char* kLifetimes = "lifetimes.csv";
inline constexpr const char* kManifest = "manifest.txt";
std::string composition(std::size_t global_topic);
}  // namespace artifacts

// Loads the trained local topic sets in canonical segment order.
std::vector<LocalTopicSet> load_local_topics(const PipelineConfig& config);

// Loads merged.tsv and assignments/centroids into a clustering.
std::pair<TopicMatrix, Clustering> load_clustering(const PipelineConfig& config);

// Reads a topic file and collapses rows sharing a topic index into their
// mean (e.g. per-time-slice topics of one dynamic topic).
std::vector<Vector> load_topic_collection(const std::filesystem::path& path);

// Matches the top-n word sets of two topic files one-to-one. When
// `out` is given the table is written there.
MatchReport compare_models(const std::filesystem::path& topics_a,
                           const std::filesystem::path& topics_b, std::size_t top_n,
                           const std::filesystem::path& out = {});

}  // namespace clda
