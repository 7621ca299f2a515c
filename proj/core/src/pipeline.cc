#include "clda/pipeline.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "clda/errors.h"
#include "clda/io.h"
#include "clda/parallel.h"

#ifndef CLDA_VERSION
#define CLDA_VERSION "unknown"
#endif

namespace clda {

namespace fs = std::filesystem;

std::string artifacts::composition(std::size_t global_topic) {
  return "composition_" + std::to_string(global_topic) + ".csv";
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const std::string s = trim(text);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("invalid value '" + std::string(text) + "' for " + std::string(key));
  }
  return value;
}

std::string number(double v) { return io::format_exact(v); }

struct KeyHandler {
  std::function<void(PipelineConfig&, std::string_view)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

#define CLDA_SIZE_KEY(name)                                                              \
  {                                                                                      \
    #name, {                                                                             \
      [](PipelineConfig& c, std::string_view v) { c.name = parse_number<std::size_t>(#name, v); }, \
          [](const PipelineConfig& c) { return std::to_string(c.name); }                 \
    }                                                                                    \
  }

#define CLDA_DOUBLE_KEY(name)                                                          \
  {                                                                                    \
    #name, {                                                                           \
      [](PipelineConfig& c, std::string_view v) { c.name = parse_number<double>(#name, v); }, \
          [](const PipelineConfig& c) { return number(c.name); }                       \
    }                                                                                  \
  }

#define CLDA_PATH_KEY(name)                                                     \
  {                                                                             \
    #name, {                                                                    \
      [](PipelineConfig& c, std::string_view v) { c.name = trim(v); },          \
          [](const PipelineConfig& c) { return c.name.string(); }               \
    }                                                                           \
  }

const std::map<std::string, KeyHandler, std::less<>>& handlers() {
  static const std::map<std::string, KeyHandler, std::less<>> table = {
      CLDA_PATH_KEY(input),
      {"format",
       {[](PipelineConfig& c, std::string_view v) {
          const auto s = trim(v);
          if (s == "text") {
            c.format = InputFormat::kText;
          } else if (s == "bow") {
            c.format = InputFormat::kBagOfWords;
          } else {
            throw ConfigError("format must be 'text' or 'bow'");
          }
        },
        [](const PipelineConfig& c) {
          return std::string(c.format == InputFormat::kText ? "text" : "bow");
        }}},
      CLDA_PATH_KEY(vocab),
      CLDA_PATH_KEY(stopwords),
      CLDA_SIZE_KEY(min_count),
      CLDA_DOUBLE_KEY(min_doc_fraction),
      {"segment_order",
       {[](PipelineConfig& c, std::string_view v) {
          const auto s = trim(v);
          if (s == "lexicographic") {
            c.segment_order = SegmentOrder::kLexicographic;
          } else if (s == "numeric") {
            c.segment_order = SegmentOrder::kNumeric;
          } else {
            throw ConfigError("segment_order must be 'lexicographic' or 'numeric'");
          }
        },
        [](const PipelineConfig& c) {
          return std::string(c.segment_order == SegmentOrder::kNumeric ? "numeric"
                                                                       : "lexicographic");
        }}},
      CLDA_SIZE_KEY(local_topics),
      CLDA_SIZE_KEY(global_topics),
      {"alpha",
       {[](PipelineConfig& c, std::string_view v) {
          const auto s = trim(v);
          if (s.empty() || s == "auto") {
            c.alpha.reset();
          } else {
            c.alpha = parse_number<double>("alpha", s);
          }
        },
        [](const PipelineConfig& c) { return c.alpha ? number(*c.alpha) : std::string("auto"); }}},
      CLDA_DOUBLE_KEY(beta),
      CLDA_SIZE_KEY(iterations),
      CLDA_SIZE_KEY(shards),
      CLDA_SIZE_KEY(fold_in_iterations),
      CLDA_DOUBLE_KEY(epsilon),
      CLDA_SIZE_KEY(restarts),
      CLDA_SIZE_KEY(max_iters),
      CLDA_DOUBLE_KEY(tol),
      {"init_mode",
       {[](PipelineConfig& c, std::string_view v) {
          const auto s = trim(v);
          if (s == "random-topics") {
            c.init_mode = InitMode::kRandomTopics;
          } else if (s == "provided") {
            c.init_mode = InitMode::kProvided;
          } else {
            throw ConfigError("init_mode must be 'random-topics' or 'provided'");
          }
        },
        [](const PipelineConfig& c) {
          return std::string(c.init_mode == InitMode::kProvided ? "provided" : "random-topics");
        }}},
      CLDA_SIZE_KEY(init_iterations),
      CLDA_DOUBLE_KEY(holdout_fraction),
      CLDA_SIZE_KEY(top_n),
      CLDA_SIZE_KEY(reference_iterations),
      CLDA_PATH_KEY(reference_topics),
      {"mass_weighting",
       {[](PipelineConfig& c, std::string_view v) {
          const auto s = trim(v);
          if (s == "tokens") {
            c.mass_weighting = MassWeighting::kTokens;
          } else if (s == "documents") {
            c.mass_weighting = MassWeighting::kDocuments;
          } else {
            throw ConfigError("mass_weighting must be 'tokens' or 'documents'");
          }
        },
        [](const PipelineConfig& c) {
          return std::string(c.mass_weighting == MassWeighting::kTokens ? "tokens" : "documents");
        }}},
      {"seed",
       {[](PipelineConfig& c, std::string_view v) { c.seed = parse_number<std::uint64_t>("seed", v); },
        [](const PipelineConfig& c) { return std::to_string(c.seed); }}},
      CLDA_SIZE_KEY(workers),
      CLDA_PATH_KEY(output),
  };
  return table;
}

#undef CLDA_SIZE_KEY
#undef CLDA_DOUBLE_KEY
#undef CLDA_PATH_KEY

}  // namespace

const std::vector<std::string>& PipelineConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, handler] : handlers()) out.push_back(name);
    return out;
  }();
  return names;
}

void PipelineConfig::set(std::string_view key, std::string_view value) {
  auto it = handlers().find(key);
  if (it == handlers().end()) throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  it->second.set(*this, value);
}

std::string PipelineConfig::get(std::string_view key) const {
  auto it = handlers().find(key);
  if (it == handlers().end()) throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  return it->second.get(*this);
}

PipelineConfig PipelineConfig::from_file(const fs::path& path) {
  PipelineConfig config;
  std::size_t line_no = 0;
  for (const auto& raw : io::read_lines(path)) {
    ++line_no;
    std::string line = raw.substr(0, raw.find('#'));
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    config.set(trim(std::string_view(line).substr(0, eq)), std::string_view(line).substr(eq + 1));
  }
  return config;
}

void PipelineConfig::validate() const {
  if (local_topics < 1) throw ConfigError("local_topics (L) must be at least 1");
  if (global_topics < 1) throw ConfigError("global_topics (K) must be at least 1");
  if (!(holdout_fraction >= 0 && holdout_fraction < 1)) {
    throw ConfigError("holdout_fraction must be in [0, 1)");
  }
  if (alpha && !(*alpha > 0)) throw ConfigError("alpha must be positive");
  if (!(beta > 0)) throw ConfigError("beta must be positive");
  if (iterations < 1) throw ConfigError("iterations must be at least 1");
  if (shards < 1) throw ConfigError("shards must be at least 1");
  if (restarts < 1) throw ConfigError("restarts must be at least 1");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (top_n < 1) throw ConfigError("top_n must be at least 1");
  if (!(epsilon >= 0)) throw ConfigError("epsilon must be non-negative");
  if (init_mode == InitMode::kProvided && init_iterations < 1) {
    throw ConfigError("init_iterations must be at least 1");
  }
}

SamplerConfig PipelineConfig::sampler_config(std::size_t num_topics, std::size_t sweeps,
                                             std::uint64_t sampler_seed) const {
  SamplerConfig sc = SamplerConfig::with_defaults(num_topics);
  if (alpha) sc.alpha = *alpha;
  sc.beta = beta;
  sc.iterations = sweeps;
  sc.seed = sampler_seed;
  sc.fold_in_iterations = fold_in_iterations;
  return sc;
}

// ---------------------------------------------------------------------------
// Stage helpers

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::kIngest: return "ingest";
    case Stage::kTrain: return "train";
    case Stage::kMerge: return "merge";
    case Stage::kCluster: return "cluster";
    case Stage::kEvaluate: return "evaluate";
    case Stage::kReport: return "report";
  }
  return "unknown";
}

std::optional<Stage> parse_stage(std::string_view name) {
  for (Stage s : all_stages()) {
    if (stage_name(s) == name) return s;
  }
  return std::nullopt;
}

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> ordered = {Stage::kIngest,  Stage::kTrain,    Stage::kMerge,
                                             Stage::kCluster, Stage::kEvaluate, Stage::kReport};
  return ordered;
}

namespace {

// Seed streams for the stages that draw randomness beyond per-segment training.
constexpr std::uint64_t kHoldoutStream = 11;
constexpr std::uint64_t kInitLdaStream = 12;
constexpr std::uint64_t kReferenceStream = 13;
constexpr std::uint64_t kGlobalScoreStream = 14;
constexpr std::uint64_t kLocalScoreStream = 1000;

fs::path out_path(const PipelineConfig& c, const fs::path& rel) { return c.output / rel; }

fs::path segment_dir(const PipelineConfig& c, const std::string& key) {
  return c.output / artifacts::kSegmentDir / key;
}

void check_segment_key(const std::string& key) {
  if (key.empty() || key == "." || key == ".." ||
      key.find_first_of("/\\\t\n") != std::string::npos) {
    throw CorruptionError("segment key '" + key + "' cannot be used as a directory name");
  }
}

void require(const fs::path& path) {
  if (!fs::exists(path)) throw MissingArtifactError(path.string());
}

std::map<std::string, std::string> read_stats(const fs::path& path) {
  std::map<std::string, std::string> stats;
  for (const auto& line : io::read_lines(path)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    stats[trim(std::string_view(line).substr(0, eq))] = trim(std::string_view(line).substr(eq + 1));
  }
  return stats;
}

std::shared_ptr<const Vocabulary> load_vocabulary(const PipelineConfig& c) {
  return std::make_shared<const Vocabulary>(io::read_vocabulary(out_path(c, artifacts::kVocab)));
}

Corpus load_corpus(const PipelineConfig& c, const char* file,
                   std::shared_ptr<const Vocabulary> vocabulary,
                   const std::vector<std::string>& order) {
  Corpus corpus;
  corpus.vocabulary = std::move(vocabulary);
  corpus.documents = io::read_bow(out_path(c, file), corpus.vocab_size());
  std::unordered_set<std::string> present;
  for (const auto& doc : corpus.documents) present.insert(doc.segment_key);
  for (const auto& key : order) {
    if (present.contains(key)) corpus.segments.push_back(key);
  }
  // Keys missing from `order` (test-only segments) follow in canonical order.
  std::vector<std::string> extra;
  for (const auto& key : present) {
    if (std::find(order.begin(), order.end(), key) == order.end()) extra.push_back(key);
  }
  const auto sorted = order_segments(std::move(extra), c.segment_order);
  corpus.segments.insert(corpus.segments.end(), sorted.begin(), sorted.end());
  return corpus;
}

std::size_t shard_threads(const PipelineConfig& c, std::size_t concurrent_segments) {
  const std::size_t busy = std::max<std::size_t>(1, std::min(c.workers, concurrent_segments));
  return std::max<std::size_t>(1, c.workers / busy);
}

// ---------------------------------------------------------------------------
// Stages

void ingest(const PipelineConfig& c) {
  fs::create_directories(c.output);
  Corpus corpus;
  std::size_t dropped_documents = 0;
  std::size_t dropped_tokens = 0;

  if (c.format == InputFormat::kText) {
    const auto records = io::read_text_records(c.input);
    std::unordered_set<std::string> stopwords;
    if (!c.stopwords.empty()) {
      for (auto& w : io::read_lines(c.stopwords)) {
        for (auto& t : tokenize(w)) stopwords.insert(std::move(t));
      }
    }
    std::vector<std::vector<std::string>> token_lists;
    token_lists.reserve(records.size());
    for (const auto& r : records) token_lists.push_back(r.tokens);
    auto vocabulary = std::make_shared<const Vocabulary>(
        build_vocabulary(token_lists, stopwords, c.min_count, c.min_doc_fraction));
    auto encoded = encode(records, vocabulary, c.segment_order);
    corpus = std::move(encoded.corpus);
    dropped_documents = encoded.dropped_documents;
    dropped_tokens = encoded.dropped_tokens;
  } else {
    if (c.vocab.empty()) throw ConfigError("bag-of-words input needs 'vocab'");
    auto vocabulary = std::make_shared<const Vocabulary>(io::read_vocabulary(c.vocab));
    corpus.vocabulary = vocabulary;
    for (auto& doc : io::read_bow(c.input, vocabulary->size())) {
      dropped_tokens += doc.oov_tokens;
      if (doc.tokens.empty()) {
        ++dropped_documents;
        continue;
      }
      corpus.documents.push_back(std::move(doc));
    }
    corpus.segments = segment_keys(corpus.documents, c.segment_order);
  }
  if (corpus.documents.empty()) throw Error("no documents left after encoding");
  for (const auto& key : corpus.segments) check_segment_key(key);

  auto split = holdout_split(corpus, c.holdout_fraction, derive_seed(c.seed, kHoldoutStream));
  const std::size_t S = split.train.segments.size();
  if (c.global_topics > S * c.local_topics) {
    throw ConfigError("global_topics K=" + std::to_string(c.global_topics) +
                      " exceeds S*L=" + std::to_string(S * c.local_topics));
  }

  std::size_t heldout_oov = 0;
  for (const auto& doc : split.test.documents) heldout_oov += doc.oov_tokens;

  io::write_vocabulary(out_path(c, artifacts::kVocab), *corpus.vocabulary);
  io::write_lines(out_path(c, artifacts::kSegments), split.train.segments);
  io::write_bow(out_path(c, artifacts::kTrain), split.train.documents);
  io::write_bow(out_path(c, artifacts::kTest), split.test.documents);
  std::vector<std::string> stats = {
      "documents = " + std::to_string(corpus.documents.size()),
      "dropped_documents = " + std::to_string(dropped_documents),
      "dropped_tokens = " + std::to_string(dropped_tokens),
      "vocabulary = " + std::to_string(corpus.vocab_size()),
      "segments = " + std::to_string(S),
      "train_documents = " + std::to_string(split.train.documents.size()),
      "test_documents = " + std::to_string(split.test.documents.size()),
      "heldout_oov_tokens = " + std::to_string(heldout_oov),
  };
  io::write_lines(out_path(c, artifacts::kIngestStats), stats);
}

void train_stage(const PipelineConfig& c) {
  require(out_path(c, artifacts::kTrain));
  auto vocabulary = load_vocabulary(c);
  const auto order = io::read_lines(out_path(c, artifacts::kSegments));
  const auto corpus = load_corpus(c, artifacts::kTrain, vocabulary, order);
  const auto segments = split_corpus(corpus);

  fs::remove_all(c.output / artifacts::kSegmentDir);
  const std::size_t inner = shard_threads(c, segments.size());
  parallel_for(segments.size(), c.workers, [&](std::size_t s) {
    const auto& segment = segments[s];
    check_segment_key(segment.key);
    const auto sc = c.sampler_config(c.local_topics, c.iterations, c.seed + segment.index);
    auto local = train_sharded(segment, sc, c.shards, inner);
    const auto dir = segment_dir(c, segment.key);
    io::write_topics(dir / artifacts::kTopics, local.topics);
    io::write_mixtures(dir / artifacts::kMixtures, local.doc_ids, local.doc_mixtures);
    io::write_topic_counts(dir / artifacts::kTopicCounts, local.counts);
    io::write_doc_counts(dir / artifacts::kDocCounts, local.doc_ids, local.counts);
  });
}

void merge_stage(const PipelineConfig& c) {
  const auto locals = load_local_topics(c);
  const auto vocab_size = load_vocabulary(c)->size();
  const auto merged = merge_all(locals, vocab_size, c.epsilon, c.workers);
  io::write_merged(out_path(c, artifacts::kMerged), merged);
  io::write_discarded(out_path(c, artifacts::kDiscarded), merged.discarded);
}

void cluster_stage(const PipelineConfig& c) {
  const auto matrix = io::read_merged(out_path(c, artifacts::kMerged));
  if (c.global_topics > matrix.size()) {
    throw ConfigError("global_topics K=" + std::to_string(c.global_topics) + " exceeds the " +
                      std::to_string(matrix.size()) + " merged local topics");
  }
  const KMeansOptions options{c.max_iters, c.tol};

  Clustering clustering;
  if (c.init_mode == InitMode::kProvided) {
    auto vocabulary = load_vocabulary(c);
    const auto order = io::read_lines(out_path(c, artifacts::kSegments));
    const auto corpus = load_corpus(c, artifacts::kTrain, vocabulary, order);
    const auto sc = c.sampler_config(c.global_topics, c.init_iterations,
                                     derive_seed(c.seed, kInitLdaStream));
    auto full = train_sharded(whole_corpus(corpus), sc, c.shards, c.workers);
    io::write_topics(out_path(c, artifacts::kInitTopics), full.topics);
    clustering = multi_restart(matrix.rows, c.global_topics, 1, c.seed, InitMode::kProvided,
                               options, full.topics);
  } else {
    clustering = multi_restart(matrix.rows, c.global_topics, c.restarts, c.seed,
                               InitMode::kRandomTopics, options, {}, c.workers);
  }

  io::write_topics(out_path(c, artifacts::kCentroids), clustering.centroids);
  io::write_assignments(out_path(c, artifacts::kAssignments), matrix, clustering);
  const std::vector<std::string> summary = {
      "objective = " + number(clustering.objective),
      "iterations = " + std::to_string(clustering.iterations),
      "restarts = " + std::to_string(clustering.restarts_run),
      "rows = " + std::to_string(matrix.size()),
      "clusters = " + std::to_string(clustering.k()),
  };
  io::write_lines(out_path(c, artifacts::kClustering), summary);
}

// Probability-form global topics: the mean of each cluster's member local
// topics. Clusters without members are skipped.
std::vector<Vector> global_topic_distributions(const TopicMatrix& matrix,
                                               const Clustering& clustering,
                                               const std::vector<LocalTopicSet>& locals) {
  const auto clusters = cluster_of_local_topics(matrix, clustering, locals);
  std::vector<std::vector<Vector>> members(clustering.k());
  for (std::size_t s = 0; s < locals.size(); ++s) {
    for (std::size_t i = 0; i < clusters[s].size(); ++i) {
      if (clusters[s][i]) members[*clusters[s][i]].push_back(locals[s].topics[i]);
    }
  }
  std::vector<Vector> topics;
  for (const auto& m : members) {
    if (!m.empty()) topics.push_back(global_topic_mean(m));
  }
  return topics;
}

void evaluate_stage(const PipelineConfig& c) {
  require(out_path(c, artifacts::kTest));
  auto vocabulary = load_vocabulary(c);
  const auto order = io::read_lines(out_path(c, artifacts::kSegments));
  const auto locals = load_local_topics(c);
  const auto [matrix, clustering] = load_clustering(c);
  const auto test = load_corpus(c, artifacts::kTest, vocabulary, order);
  const auto stats = read_stats(out_path(c, artifacts::kIngestStats));
  const std::size_t heldout_oov =
      stats.contains("heldout_oov_tokens") ? std::stoull(stats.at("heldout_oov_tokens")) : 0;

  std::vector<std::string> lines;
  std::size_t unscorable = 0;
  std::size_t oov = heldout_oov;

  // Perplexity under the K global topics.
  std::optional<HeldoutScore> global_score;
  const auto global_topics = global_topic_distributions(matrix, clustering, locals);
  if (!test.documents.empty()) {
    const auto sc = c.sampler_config(global_topics.size(), 1, 0);
    global_score = score_heldout(global_topics, test.documents, sc,
                                 derive_seed(c.seed, kGlobalScoreStream), c.workers);
    unscorable = global_score->unscorable_documents;
    oov += global_score->oov_tokens;
  }

  // Perplexity of each document under its own segment's local model.
  std::unordered_map<std::string, std::size_t> local_index;
  for (std::size_t s = 0; s < locals.size(); ++s) local_index[locals[s].segment_key] = s;
  std::map<std::size_t, std::vector<Document>> by_segment;
  std::size_t no_model = 0;
  for (const auto& doc : test.documents) {
    auto it = local_index.find(doc.segment_key);
    if (it == local_index.end()) {
      ++no_model;
      continue;
    }
    by_segment[it->second].push_back(doc);
  }
  double weighted_log = 0;
  std::size_t local_tokens = 0;
  for (const auto& [s, docs] : by_segment) {
    const auto sc = c.sampler_config(c.local_topics, 1, 0);
    const auto score = score_heldout(locals[s].topics, docs, sc,
                                     derive_seed(c.seed, kLocalScoreStream + s), c.workers);
    weighted_log += std::log(score.perplexity) * static_cast<double>(score.scored_tokens);
    local_tokens += score.scored_tokens;
  }

  lines.push_back("# held-out evaluation");
  lines.push_back("heldout_documents = " + std::to_string(test.documents.size()));
  if (global_score) {
    lines.push_back("perplexity = " + io::format_fixed(global_score->perplexity, 6));
    lines.push_back("global_topics_scored = " + std::to_string(global_topics.size()));
    lines.push_back("scored_documents = " + std::to_string(global_score->scored_documents));
    lines.push_back("scored_tokens = " + std::to_string(global_score->scored_tokens));
  } else {
    lines.push_back("perplexity = nan");
  }
  if (local_tokens > 0) {
    lines.push_back("perplexity_local = " +
                    io::format_fixed(std::exp(weighted_log / static_cast<double>(local_tokens)), 6));
  }
  lines.push_back("oov_tokens = " + std::to_string(oov));
  lines.push_back("unscorable_documents = " + std::to_string(unscorable));
  lines.push_back("documents_without_segment_model = " + std::to_string(no_model));

  // Match table: CLDA centroids against a reference topic collection.
  std::vector<Vector> reference;
  std::string reference_label;
  if (!c.reference_topics.empty()) {
    reference = load_topic_collection(c.reference_topics);
    reference_label = c.reference_topics.string();
  } else if (c.reference_iterations > 0) {
    const auto corpus = load_corpus(c, artifacts::kTrain, vocabulary, order);
    const auto sc = c.sampler_config(c.global_topics, c.reference_iterations,
                                     derive_seed(c.seed, kReferenceStream));
    reference = train_sharded(whole_corpus(corpus), sc, c.shards, c.workers).topics;
    io::write_topics(out_path(c, artifacts::kReference), reference);
    reference_label = "full-corpus LDA";
  }
  if (!reference.empty()) {
    if (reference.front().size() != vocabulary->size()) {
      throw ConfigError("reference topics have vocabulary size " +
                        std::to_string(reference.front().size()) + ", expected " +
                        std::to_string(vocabulary->size()));
    }
    std::vector<WordSet> sets_a;
    std::vector<WordSet> sets_b;
    for (const auto& centroid : clustering.centroids) sets_a.push_back(top_words(centroid, c.top_n));
    for (const auto& topic : reference) sets_b.push_back(top_words(topic, c.top_n));
    const auto report = greedy_match(sets_a, sets_b);
    lines.push_back("reference = " + reference_label);
    lines.push_back("top_n = " + std::to_string(c.top_n));
    lines.push_back("mean_jaccard = " + io::format_fixed(report.mean_jaccard(), 6));
    lines.push_back("mean_dice = " + io::format_fixed(report.mean_dice(), 6));
    lines.push_back("");
    lines.push_back("[matches]");
    std::ostringstream table;
    io::write_match_table(table, report);
    std::string row;
    std::istringstream rows(table.str());
    while (std::getline(rows, row)) lines.push_back(row);
  }
  io::write_lines(out_path(c, artifacts::kEval), lines);
}

void report_stage(const PipelineConfig& c) {
  auto vocabulary = load_vocabulary(c);
  const auto locals = load_local_topics(c);
  const auto [matrix, clustering] = load_clustering(c);
  const auto report = build_dynamics(matrix, clustering, locals, c.top_n, c.mass_weighting);

  for (const auto& entry : fs::directory_iterator(c.output)) {
    if (entry.path().filename().string().starts_with("composition_")) fs::remove(entry.path());
  }
  io::write_proportions_csv(out_path(c, artifacts::kProportions), report);
  for (std::size_t g = 0; g < clustering.k(); ++g) {
    io::write_composition_csv(out_path(c, artifacts::composition(g)), report, g, *vocabulary);
  }
  io::write_lifetimes_csv(out_path(c, artifacts::kLifetimes), report);
}

// ---------------------------------------------------------------------------
// Manifest

void write_manifest(const PipelineConfig& c, Stage stage, double seconds) {
  const auto path = out_path(c, artifacts::kManifest);
  std::map<std::string, std::string> timings;
  if (fs::exists(path)) {
    bool in_timing = false;
    for (const auto& line : io::read_lines(path)) {
      if (line.starts_with("[")) {
        in_timing = line == "[timing]";
        continue;
      }
      const auto eq = line.find('=');
      if (in_timing && eq != std::string::npos) {
        timings[trim(std::string_view(line).substr(0, eq))] =
            trim(std::string_view(line).substr(eq + 1));
      }
    }
  }
  timings[std::string(stage_name(stage))] = io::format_fixed(seconds, 3) + " s";

  std::vector<std::string> lines = {"# clda run manifest", "version = " CLDA_VERSION, "",
                                     "[config]"};
  for (const auto& key : PipelineConfig::keys()) lines.push_back(key + " = " + c.get(key));

  lines.push_back("");
  lines.push_back("[seeds]");
  lines.push_back("base = " + std::to_string(c.seed));
  const auto segments_file = out_path(c, artifacts::kSegments);
  if (fs::exists(segments_file)) {
    const auto keys = io::read_lines(segments_file);
    for (std::size_t s = 0; s < keys.size(); ++s) {
      lines.push_back("segment." + keys[s] + " = " + std::to_string(c.seed + s));
    }
  }
  lines.push_back("holdout = " + std::to_string(derive_seed(c.seed, kHoldoutStream)));
  lines.push_back("clustering = " + std::to_string(c.seed));

  lines.push_back("");
  lines.push_back("[timing]");
  for (Stage s : all_stages()) {
    auto it = timings.find(std::string(stage_name(s)));
    if (it != timings.end()) lines.push_back(it->first + " = " + it->second);
  }

  lines.push_back("");
  lines.push_back("[files]");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(c.output)) {
    if (entry.is_regular_file() && entry.path().filename() != artifacts::kManifest) {
      files.push_back(fs::relative(entry.path(), c.output));
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    lines.push_back(f.generic_string() + " sha256:" + io::sha256_file(c.output / f));
  }
  io::write_lines(path, lines);
}

}  // namespace

std::vector<LocalTopicSet> load_local_topics(const PipelineConfig& c) {
  const auto vocab_size = load_vocabulary(c)->size();
  const auto order = io::read_lines(out_path(c, artifacts::kSegments));
  std::vector<LocalTopicSet> locals;
  locals.reserve(order.size());
  for (const auto& key : order) {
    const auto dir = segment_dir(c, key);
    std::vector<std::string> doc_ids;
    auto counts = io::read_counts(dir / artifacts::kTopicCounts, dir / artifacts::kDocCounts,
                                  vocab_size, c.local_topics, &doc_ids);
    std::vector<WordId> local_vocab;
    for (std::size_t w = 0; w < vocab_size; ++w) {
      for (std::size_t k = 0; k < counts.num_topics; ++k) {
        if (counts.topic_word(k, static_cast<WordId>(w)) > 0) {
          local_vocab.push_back(static_cast<WordId>(w));
          break;
        }
      }
    }
    const auto sc = c.sampler_config(c.local_topics, 1, 0);
    locals.push_back(make_local_topic_set(key, std::move(local_vocab), std::move(doc_ids),
                                          std::move(counts), sc.alpha, sc.beta));
  }
  return locals;
}

std::pair<TopicMatrix, Clustering> load_clustering(const PipelineConfig& c) {
  auto matrix = io::read_merged(out_path(c, artifacts::kMerged));
  const auto discarded_path = out_path(c, artifacts::kDiscarded);
  if (fs::exists(discarded_path)) matrix.discarded = io::read_discarded(discarded_path);
  Clustering clustering;
  clustering.assignment = io::read_assignments(out_path(c, artifacts::kAssignments), matrix);
  for (auto& row : io::read_topics(out_path(c, artifacts::kCentroids))) {
    clustering.centroids.push_back(std::move(row.values));
  }
  for (auto& centroid : clustering.centroids) centroid.resize(matrix.dim, 0.0);
  for (std::size_t g : clustering.assignment) {
    if (g >= clustering.k()) throw CorruptionError("assignment to a cluster without centroid");
  }
  return {std::move(matrix), std::move(clustering)};
}

void run_stage(const PipelineConfig& config, Stage stage) {
  const auto start = std::chrono::steady_clock::now();
  try {
    config.validate();
    switch (stage) {
      case Stage::kIngest: ingest(config); break;
      case Stage::kTrain: train_stage(config); break;
      case Stage::kMerge: merge_stage(config); break;
      case Stage::kCluster: cluster_stage(config); break;
      case Stage::kEvaluate: evaluate_stage(config); break;
      case Stage::kReport: report_stage(config); break;
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    write_manifest(config, stage, elapsed.count());
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(std::string(stage_name(stage)), e.what());
  }
}

void run_pipeline(const PipelineConfig& config) {
  for (Stage stage : all_stages()) run_stage(config, stage);
}

std::vector<Vector> load_topic_collection(const fs::path& path) {
  std::map<std::size_t, std::vector<Vector>> groups;
  for (auto& row : io::read_topics(path)) groups[row.index].push_back(std::move(row.values));
  std::vector<Vector> topics;
  for (auto& [index, rows] : groups) {
    topics.push_back(rows.size() == 1 ? std::move(rows.front()) : global_topic_mean(rows));
  }
  return topics;
}

MatchReport compare_models(const fs::path& topics_a, const fs::path& topics_b, std::size_t top_n,
                           const fs::path& out) {
  const auto a = load_topic_collection(topics_a);
  const auto b = load_topic_collection(topics_b);
  if (a.empty() || b.empty()) throw ConfigError("topic files must contain at least one topic");
  if (a.front().size() != b.front().size()) {
    throw ConfigError("vocabulary size mismatch: " + std::to_string(a.front().size()) + " vs " +
                      std::to_string(b.front().size()));
  }
  std::vector<WordSet> sets_a;
  std::vector<WordSet> sets_b;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sets_a.push_back(top_words(a[i], top_n));
    sets_a.back().label = topics_a.string();
    sets_a.back().topic = i;
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    sets_b.push_back(top_words(b[i], top_n));
    sets_b.back().label = topics_b.string();
    sets_b.back().topic = i;
  }
  auto report = greedy_match(sets_a, sets_b);
  if (!out.empty()) {
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    std::ofstream file(out, std::ios::binary | std::ios::trunc);
    if (!file) throw Error("cannot write " + out.string());
    io::write_match_table(file, report);
  }
  return report;
}

}  // namespace clda
