// Acceptance suite. Prints one PASS / FAIL / SKIP line per criterion and a
// summary; the process exits nonzero if any criterion fails.

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "clda/dynamics.h"
#include "clda/errors.h"
#include "clda/gibbs_lda.h"
#include "clda/io.h"
#include "clda/merge.h"
#include "clda/metrics.h"
#include "clda/pipeline.h"
#include "clda/spherical_kmeans.h"
#include "clda/synthetic.h"
#include "oracles.h"
#include "test_support.h"

namespace clda {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Mean Jaccard of the planted-topic recovery in criterion 4, recorded from
// the first oracle run of this fixture (libstdc++ gamma sampling).
constexpr double kPinnedRecoveryJaccard = 0.939393939393939;

// ---------------------------------------------------------------------------
// Shared planted-corpus run used by criteria 4 and 7.

struct PlantedRun {
  testing::TempDir dir{"acceptance"};
  PlantedCorpus planted;
  fs::path corpus_file;
  fs::path vocab_file;

  PlantedRun() {
    planted = make_planted_corpus(PlantedCorpusSpec{});
    corpus_file = dir / "planted.bow";
    vocab_file = dir / "planted_vocab.txt";
    io::write_bow(corpus_file, planted.corpus.documents);
    io::write_vocabulary(vocab_file, *planted.corpus.vocabulary);
  }

  PipelineConfig config(const std::string& name, std::size_t workers) const {
    PipelineConfig c;
    c.input = corpus_file;
    c.format = InputFormat::kBagOfWords;
    c.vocab = vocab_file;
    c.local_topics = 10;
    c.global_topics = 6;
    c.iterations = 500;
    c.restarts = 10;
    c.reference_iterations = 0;
    c.top_n = 10;
    c.seed = 2024;
    c.workers = workers;
    c.output = dir / name;
    return c;
  }

  static PlantedRun& get() {
    static PlantedRun run;
    return run;
  }
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().filename() == artifacts::kManifest) continue;
    files[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
  }
  return files;
}

// ---------------------------------------------------------------------------

TEST(Acceptance, Criterion1_PerplexityOracle) {
  const auto start = Clock::now();
  // Three documents; log-probabilities sum to -6 ln 2 over 3 tokens.
  const std::vector<Vector> fixture = {{0.5}, {0.25}, {0.125}};
  const double expected = std::exp(2 * std::log(2.0));
  EXPECT_NEAR(perplexity(fixture) / expected - 1, 0.0, 1e-9);
  EXPECT_NEAR(perplexity(fixture), 4.0, 4e-9);
  for (std::size_t W : {2u, 100u, 10000u}) {
    std::vector<Vector> docs = {Vector(37, 1.0 / W), Vector(5, 1.0 / W), Vector(1, 1.0 / W)};
    EXPECT_NEAR(perplexity(docs) / static_cast<double>(W) - 1, 0.0, 1e-9) << W;
  }
  EXPECT_LT(seconds_since(start), 1.0);
}

TEST(Acceptance, Criterion2_GibbsInvariants) {
  const auto start = Clock::now();
  const std::size_t W = 200;
  const std::size_t K = 5;
  const auto docs = testing::random_documents(50, W, 60, 42);
  std::int64_t total = 0;
  for (const auto& d : docs) total += static_cast<std::int64_t>(d.tokens.size());
  auto config = SamplerConfig::with_defaults(K);
  config.seed = 99;

  for (std::size_t shards : {1u, 4u}) {
    GibbsSampler sampler(docs, W, config, shards, shards);
    for (int sweep = 0; sweep < 100; ++sweep) {
      sampler.sweep();
      const auto& c = sampler.state().counts;
      // sum_w n_wk = n_k
      for (std::size_t k = 0; k < K; ++k) {
        std::int64_t s = 0;
        for (std::size_t w = 0; w < W; ++w) s += c.topic_word(k, static_cast<WordId>(w));
        ASSERT_EQ(s, c.topic_totals[k]) << "shards=" << shards << " sweep=" << sweep;
      }
      // sum_k n_jk = N_j
      for (std::size_t j = 0; j < docs.size(); ++j) {
        std::int64_t s = 0;
        for (std::size_t k = 0; k < K; ++k) s += c.doc_topic_count(j, k);
        ASSERT_EQ(s, static_cast<std::int64_t>(docs[j].tokens.size()));
      }
      // sum_k n_k = total tokens
      ASSERT_EQ(std::accumulate(c.topic_totals.begin(), c.topic_totals.end(), std::int64_t{0}), total);
      // And the counts are exactly those implied by z.
      ASSERT_TRUE(testing::counts_equal(c, testing::recount(sampler.state(), docs, W, K)));
    }
  }
  EXPECT_LT(seconds_since(start), 10.0);
}

TEST(Acceptance, Criterion3_FitImprovement) {
  const auto start = Clock::now();
  const auto planted = make_planted_corpus(PlantedCorpusSpec{});
  const auto split = holdout_split(planted.corpus, 0.2, 7);
  auto config = SamplerConfig::with_defaults(6);
  config.seed = 11;

  auto perplexity_after = [&](std::size_t sweeps) {
    config.iterations = sweeps;
    const auto local = train(whole_corpus(split.train), config);
    return score_heldout(local.topics, split.test.documents, config, 5).perplexity;
  };
  const double early = perplexity_after(2);
  const double late = perplexity_after(200);
  std::printf("    held-out perplexity: 2 sweeps %.3f, 200 sweeps %.3f\n", early, late);
  EXPECT_LT(late, early);
  EXPECT_LT(seconds_since(start), 60.0);
}

TEST(Acceptance, Criterion4_PlantedTopicRecovery) {
  const auto start = Clock::now();
  auto& run = PlantedRun::get();
  const auto config = run.config("recovery", 8);
  run_pipeline(config);
  const double elapsed = seconds_since(start);

  auto [matrix, clustering] = load_clustering(config);
  std::vector<WordSet> found;
  std::vector<WordSet> truth;
  for (const auto& c : clustering.centroids) found.push_back(top_words(c, 10));
  for (const auto& t : run.planted.topics) truth.push_back(top_words(t, 10));
  const double mean_j = greedy_match(found, truth).mean_jaccard();
  std::printf("    mean Jaccard of top-10 sets vs planted topics: %.9f (%.1f s)\n", mean_j, elapsed);
  EXPECT_GE(mean_j, 0.8);
  EXPECT_NEAR(mean_j, kPinnedRecoveryJaccard, 1e-9) << "pinned fixture value changed";
  EXPECT_LT(elapsed, 300.0);
}

TEST(Acceptance, Criterion5_ClusteringOracle) {
  const auto start = Clock::now();
  Rng rng(5);
  for (int instance = 0; instance < 40; ++instance) {
    const std::size_t n = 4 + rng.below(5);  // 4..8 rows
    const std::size_t k = 2 + rng.below(2);  // 2 or 3
    const std::size_t dim = 3 + rng.below(3);
    std::vector<Vector> rows(n, Vector(dim));
    for (auto& row : rows) {
      for (auto& v : row) v = rng.uniform();
      normalize_row(row);
    }

    // Every k-subset of distinct rows as an initialization.
    const auto distinct = distinct_rows(rows);
    std::vector<std::vector<Vector>> inits;
    std::vector<std::size_t> pick(k);
    std::iota(pick.begin(), pick.end(), 0);
    while (true) {
      std::vector<Vector> init;
      for (auto p : pick) init.push_back(rows[distinct[p]]);
      inits.push_back(init);
      std::size_t i = k;
      while (i > 0 && pick[i - 1] == distinct.size() - k + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }

    for (const auto& init : inits) {
      const auto c = kmeans(rows, k, init);
      for (std::size_t i = 1; i < c.objective_trace.size(); ++i) {
        ASSERT_LE(c.objective_trace[i], c.objective_trace[i - 1]) << "instance " << instance;
      }
    }
    const auto best = best_of(rows, k, inits);
    const double oracle = testing::brute_force_objective(rows, k);
    ASSERT_NEAR(best.objective, oracle, 1e-9) << "instance " << instance << " n=" << n << " k=" << k;
  }
  EXPECT_LT(seconds_since(start), 1.0);
}

TEST(Acceptance, Criterion6_MetricIdentities) {
  const auto start = Clock::now();
  Rng rng(6);
  auto random_set = [&](std::size_t universe, std::size_t max_size) {
    std::vector<WordId> words;
    const std::size_t n = 1 + rng.below(max_size);
    std::vector<bool> used(universe, false);
    while (words.size() < n) {
      const auto w = static_cast<WordId>(rng.below(universe));
      if (!used[w]) {
        used[w] = true;
        words.push_back(w);
      }
    }
    std::sort(words.begin(), words.end());
    return WordSet{words, n, "", 0};
  };

  for (int t = 0; t < 1000; ++t) {
    const auto a = random_set(40, 20);
    const auto b = random_set(40, 20);
    const double j = jaccard(a, b);
    const double d = dice(a, b);
    ASSERT_EQ(j, jaccard(b, a));
    ASSERT_EQ(d, dice(b, a));
    ASSERT_TRUE(j >= 0 && j <= 1 && d >= 0 && d <= 1);
    ASSERT_NEAR(d, 2 * j / (1 + j), 1e-12);
  }

  WordSet a{{}, 20, "", 0};
  WordSet b{{}, 20, "", 0};
  for (WordId w = 0; w < 20; ++w) a.words.push_back(w);
  for (WordId w = 4; w < 24; ++w) b.words.push_back(w);
  EXPECT_NEAR(dice(a, b), 0.8, 1e-12);
  EXPECT_NEAR(jaccard(a, b), 16.0 / 24.0, 1e-12);

  for (int t = 0; t < 100; ++t) {
    std::vector<WordSet> sa;
    std::vector<WordSet> sb;
    const std::size_t na = 1 + rng.below(8);
    const std::size_t nb = 1 + rng.below(8);
    for (std::size_t i = 0; i < na; ++i) sa.push_back(random_set(15, 6));
    for (std::size_t i = 0; i < nb; ++i) sb.push_back(random_set(15, 6));
    const auto fast = greedy_match(sa, sb).pairs;
    const auto slow = testing::naive_greedy(sa, sb);
    ASSERT_EQ(fast.size(), slow.size());
    for (std::size_t i = 0; i < fast.size(); ++i) {
      ASSERT_EQ(fast[i].a, slow[i].a) << "instance " << t;
      ASSERT_EQ(fast[i].b, slow[i].b) << "instance " << t;
      ASSERT_EQ(fast[i].jaccard, slow[i].jaccard) << "instance " << t;
    }
  }
  EXPECT_LT(seconds_since(start), 5.0);
}

TEST(Acceptance, Criterion7_DeterminismAndScheduleIndependence) {
  const auto start = Clock::now();
  auto& run = PlantedRun::get();
  auto first = run.config("det_a", 8);
  auto second = run.config("det_b", 8);
  auto serial = run.config("det_serial", 1);
  run_pipeline(first);
  run_pipeline(second);
  run_pipeline(serial);
  const auto a = snapshot(first.output);
  const auto b = snapshot(second.output);
  const auto s = snapshot(serial.output);
  ASSERT_GT(a.size(), 30u);
  EXPECT_EQ(a.size(), b.size());
  EXPECT_EQ(a.size(), s.size());
  for (const auto& [path, contents] : a) {
    EXPECT_TRUE(b.contains(path) && b.at(path) == contents) << "run-to-run: " << path;
    EXPECT_TRUE(s.contains(path) && s.at(path) == contents) << "workers 1 vs 8: " << path;
  }
  EXPECT_LT(seconds_since(start), 600.0);
}

TEST(Acceptance, Criterion8_ParallelSpeedup) {
  const unsigned hw = std::thread::hardware_concurrency();
  if (hw < 8) {
    GTEST_SKIP() << "UNVERIFIED: needs >= 8 hardware threads, this machine reports " << hw;
  }
  auto& run = PlantedRun::get();
  auto one = run.config("speed_1", 1);
  auto eight = run.config("speed_8", 8);
  run_stage(one, Stage::kIngest);
  run_stage(eight, Stage::kIngest);
  auto t0 = Clock::now();
  run_stage(one, Stage::kTrain);
  const double serial = seconds_since(t0);
  t0 = Clock::now();
  run_stage(eight, Stage::kTrain);
  const double parallel = seconds_since(t0);
  std::printf("    train stage: pool 1 %.2f s, pool 8 %.2f s (ratio %.3f)\n", serial, parallel,
              parallel / serial);
  EXPECT_LE(parallel, 0.5 * serial);
}

TEST(Acceptance, Criterion9_ExtremeK) {
  const auto start = Clock::now();
  const std::size_t S = 3;
  const std::size_t L = 4;
  const std::size_t W = 12;
  Rng rng(9);
  std::vector<LocalTopicSet> locals;
  for (std::size_t s = 0; s < S; ++s) {
    LocalTopicSet local;
    local.segment_key = "seg" + std::to_string(s);
    for (std::size_t w = 0; w < W; ++w) local.local_vocab.push_back(static_cast<WordId>(w));
    for (std::size_t i = 0; i < L; ++i) {
      Vector topic(W);
      for (auto& v : topic) v = rng.uniform();
      const double sum = std::accumulate(topic.begin(), topic.end(), 0.0);
      for (auto& v : topic) v /= sum;
      local.topics.push_back(topic);
    }
    local.doc_lengths = {10, 20};
    local.doc_ids = {"a", "b"};
    local.doc_mixtures = {Vector(L, 1.0 / L), Vector(L, 1.0 / L)};
    locals.push_back(std::move(local));
  }
  const auto matrix = merge_all(locals, W);
  ASSERT_EQ(matrix.size(), S * L);

  // K = 1: one cluster holding all S*L local topics.
  const auto one = multi_restart(matrix.rows, 1, 3, 1, InitMode::kRandomTopics);
  EXPECT_EQ(std::count(one.assignment.begin(), one.assignment.end(), 0u),
            static_cast<std::ptrdiff_t>(S * L));

  // K = S*L from the rows themselves: singletons, objective 0.
  const auto all = multi_restart(matrix.rows, S * L, 1, 1, InitMode::kProvided, {}, matrix.rows);
  EXPECT_NEAR(all.objective, 0.0, 1e-12);
  auto sorted = all.assignment;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(std::unique(sorted.begin(), sorted.end()) - sorted.begin(),
            static_cast<std::ptrdiff_t>(S * L));

  // K > L: each segment misses at least K - L clusters.
  for (std::size_t K : {L + 1, L + 3, S * L}) {
    const auto c = multi_restart(matrix.rows, K, 4, 3, InitMode::kRandomTopics);
    const auto report = build_dynamics(matrix, c, locals, 5);
    for (std::size_t s = 0; s < S; ++s) {
      std::size_t absent = 0;
      for (const auto& life : report.lifetimes) {
        absent += std::count(life.absent_segments.begin(), life.absent_segments.end(), s);
      }
      EXPECT_GE(absent, K - L) << "K=" << K << " segment " << s;
    }
  }
  EXPECT_LT(seconds_since(start), 1.0);
}

// ---------------------------------------------------------------------------

class CriterionPrinter : public ::testing::EmptyTestEventListener {
 public:
  void OnTestEnd(const ::testing::TestInfo& info) override {
    const auto* result = info.result();
    std::string status = "PASS";
    if (result->Skipped()) {
      status = "SKIP";
      ++skipped_;
    } else if (result->Failed()) {
      status = "FAIL";
      ++failed_;
    } else {
      ++passed_;
    }
    std::string name = info.name();
    std::string reason;
    for (int i = 0; i < result->total_part_count(); ++i) {
      const auto& part = result->GetTestPartResult(i);
      if (part.skipped() || part.failed()) {
        reason = part.message();
        break;
      }
    }
    const auto first_line = reason.substr(0, reason.find('\n'));
    std::printf("%s %s (%.2f s)%s%s\n", status.c_str(), name.c_str(),
                static_cast<double>(result->elapsed_time()) / 1000.0,
                first_line.empty() ? "" : " : ", first_line.c_str());
    std::fflush(stdout);
  }

  void OnTestProgramEnd(const ::testing::UnitTest&) override {
    std::printf("acceptance summary: %d passed, %d failed, %d skipped\n", passed_, failed_, skipped_);
  }

 private:
  int passed_ = 0;
  int failed_ = 0;
  int skipped_ = 0;
};

}  // namespace
}  // namespace clda

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  auto& listeners = ::testing::UnitTest::GetInstance()->listeners();
  listeners.Append(new clda::CriterionPrinter);
  return RUN_ALL_TESTS();
}
