#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "clda/errors.h"
#include "clda/gibbs_lda.h"
#include "clda/metrics.h"
#include "clda/synthetic.h"
#include "test_support.h"

namespace clda {
namespace {

SamplerConfig small_config(std::size_t K, std::uint64_t seed = 5) {
  SamplerConfig c = SamplerConfig::with_defaults(K);
  c.iterations = 20;
  c.seed = seed;
  return c;
}

TEST(SamplerConfig, Defaults) {
  auto c = SamplerConfig::with_defaults(10);
  EXPECT_DOUBLE_EQ(c.alpha, 5.0);
  EXPECT_DOUBLE_EQ(c.beta, 0.01);
  c.num_topics = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(InitRandom, SingleTopicPutsEverythingInTopicZero) {
  auto docs = testing::random_documents(10, 20, 15, 1);
  Rng rng(1);
  auto state = init_random(docs, 20, small_config(1), rng);
  std::size_t tokens = 0;
  for (const auto& d : docs) tokens += d.tokens.size();
  EXPECT_EQ(state.counts.topic_totals[0], static_cast<std::int64_t>(tokens));
  for (const auto& row : state.z) {
    for (auto k : row) EXPECT_EQ(k, 0u);
  }
}

TEST(InitRandom, CountsMatchAssignmentsAndAreSeeded) {
  auto docs = testing::random_documents(30, 50, 20, 2);
  Rng a(9);
  Rng b(9);
  auto s1 = init_random(docs, 50, small_config(4), a);
  auto s2 = init_random(docs, 50, small_config(4), b);
  EXPECT_EQ(s1.z, s2.z);
  EXPECT_TRUE(testing::counts_equal(s1.counts, testing::recount(s1, docs, 50, 4)));
}

TEST(InitRandom, RejectsBadInput) {
  Rng rng(1);
  std::vector<Document> none;
  EXPECT_THROW(init_random(none, 5, small_config(2), rng), ConfigError);
  std::vector<Document> bad = {{"d", "s", {7}, 0}};
  EXPECT_THROW(init_random(bad, 5, small_config(2), rng), CorruptionError);
}

TEST(TopicWeights, HandComputedConditional) {
  // W=2, K=2, alpha=beta=1. With the token removed: n_wk=[[2,0],[0,2]],
  // n_k=[2,2], n_jk=[1,0]. Weights (3/4)*2 and (1/4)*1, so P = [6/7, 1/7].
  TopicCounts c;
  c.num_topics = 2;
  c.vocab_size = 2;
  c.word_topic = {2, 0, 0, 2};
  c.topic_totals = {2, 2};
  c.doc_topic = {1, 0};
  c.doc_lengths = {1};
  SamplerConfig config;
  config.num_topics = 2;
  config.alpha = 1;
  config.beta = 1;
  std::vector<double> w(2);
  topic_weights(c, 0, 0, config, w);
  EXPECT_DOUBLE_EQ(w[0], 1.5);
  EXPECT_DOUBLE_EQ(w[1], 0.25);
  const double total = w[0] + w[1];
  EXPECT_NEAR(w[0] / total, 6.0 / 7.0, 1e-15);
  EXPECT_NEAR(w[1] / total, 1.0 / 7.0, 1e-15);
}

TEST(GibbsSweep, SingleTopicIsNoOp) {
  auto docs = testing::random_documents(5, 10, 8, 3);
  Rng rng(3);
  auto state = init_random(docs, 10, small_config(1), rng);
  auto before = state.z;
  gibbs_sweep(state, docs, small_config(1), rng);
  EXPECT_EQ(state.z, before);
}

TEST(GibbsSweep, ConservesCounts) {
  auto docs = testing::random_documents(40, 60, 25, 4);
  const auto config = small_config(5);
  Rng rng(config.seed);
  auto state = init_random(docs, 60, config, rng);
  for (int it = 0; it < 10; ++it) {
    gibbs_sweep(state, docs, config, rng);
    ASSERT_TRUE(testing::counts_equal(state.counts, testing::recount(state, docs, 60, 5)));
  }
}

TEST(ShardedSweep, ConservesCountsAcrossShards) {
  auto docs = testing::random_documents(40, 60, 25, 5);
  GibbsSampler sampler(docs, 60, small_config(5), 4, 4);
  for (int it = 0; it < 10; ++it) {
    sampler.sweep();
    ASSERT_TRUE(
        testing::counts_equal(sampler.state().counts, testing::recount(sampler.state(), docs, 60, 5)));
  }
}

TEST(ShardedSweep, OneShardMatchesSerialSampler) {
  auto docs = testing::random_documents(30, 40, 20, 6);
  const auto config = small_config(4, 11);
  Rng rng(config.seed);
  auto serial = init_random(docs, 40, config, rng);
  Rng sweep_rng(derive_seed(config.seed, 0));
  GibbsSampler sampler(docs, 40, config, 1, 1);
  for (int it = 0; it < 5; ++it) {
    gibbs_sweep(serial, docs, config, sweep_rng);
    sampler.sweep();
  }
  EXPECT_EQ(serial.z, sampler.state().z);
}

TEST(ShardedSweep, ThreadCountDoesNotChangeResult) {
  auto docs = testing::random_documents(30, 40, 20, 7);
  GibbsSampler a(docs, 40, small_config(4), 3, 1);
  GibbsSampler b(docs, 40, small_config(4), 3, 3);
  for (int it = 0; it < 5; ++it) {
    a.sweep();
    b.sweep();
  }
  EXPECT_EQ(a.state().z, b.state().z);
}

TEST(Estimates, SingleDocumentSingleWord) {
  Corpus corpus;
  corpus.vocabulary = testing::numbered_vocabulary(1);
  corpus.documents = {{"d", "s", {0, 0, 0}, 0}};
  corpus.segments = {"s"};
  auto local = train(whole_corpus(corpus), small_config(1));
  ASSERT_EQ(local.topics.size(), 1u);
  EXPECT_DOUBLE_EQ(local.topics[0][0], 1.0);
  EXPECT_DOUBLE_EQ(local.doc_mixtures[0][0], 1.0);
}

TEST(Estimates, RowsSumToOne) {
  Corpus corpus;
  corpus.vocabulary = testing::numbered_vocabulary(30);
  corpus.documents = testing::random_documents(20, 30, 12, 8);
  corpus.segments = {"s"};
  auto local = train(whole_corpus(corpus), small_config(3));
  for (const auto& phi : local.topics) {
    EXPECT_NEAR(std::accumulate(phi.begin(), phi.end(), 0.0), 1.0, 1e-9);
  }
  for (const auto& theta : local.doc_mixtures) {
    EXPECT_NEAR(std::accumulate(theta.begin(), theta.end(), 0.0), 1.0, 1e-9);
  }
}

TEST(Train, OneShardEqualsSerialTrain) {
  Corpus corpus;
  corpus.vocabulary = testing::numbered_vocabulary(30);
  corpus.documents = testing::random_documents(20, 30, 12, 9);
  corpus.segments = {"s"};
  auto a = train(whole_corpus(corpus), small_config(3));
  auto b = train_sharded(whole_corpus(corpus), small_config(3), 1, 1);
  EXPECT_EQ(a.topics, b.topics);
  EXPECT_EQ(a.doc_mixtures, b.doc_mixtures);
}

double recovery(const LocalTopicSet& local, const std::vector<Vector>& planted) {
  std::vector<WordSet> a;
  std::vector<WordSet> b;
  for (const auto& t : local.topics) a.push_back(top_words(t, 10));
  for (const auto& t : planted) b.push_back(top_words(t, 10));
  return greedy_match(a, b).mean_jaccard();
}

PlantedCorpus two_topic_corpus() {
  PlantedCorpusSpec spec;
  spec.vocab_size = 100;
  spec.num_topics = 2;
  spec.num_segments = 1;
  spec.num_documents = 200;
  spec.doc_length = 60;
  spec.seed = 21;
  return make_planted_corpus(spec);
}

TEST(Train, RecoversTwoPlantedTopics) {
  auto planted = two_topic_corpus();
  auto config = SamplerConfig::with_defaults(2);
  config.iterations = 500;
  config.seed = 3;
  auto local = train(whole_corpus(planted.corpus), config);
  EXPECT_GE(recovery(local, planted.topics), 0.8);
}

TEST(Train, FourShardsStillRecoverPlantedTopics) {
  auto planted = two_topic_corpus();
  auto config = SamplerConfig::with_defaults(2);
  config.iterations = 500;
  config.seed = 3;
  auto local = train_sharded(whole_corpus(planted.corpus), config, 4, 1);
  EXPECT_GE(recovery(local, planted.topics), 0.8);
}

TEST(FoldIn, SingleTopicGivesOne) {
  std::vector<Vector> topics = {{0.5, 0.5}};
  std::vector<WordId> tokens = {0, 1, 1};
  auto theta = fold_in(topics, tokens, small_config(1));
  ASSERT_TRUE(theta);
  EXPECT_DOUBLE_EQ((*theta)[0], 1.0);
}

TEST(FoldIn, AbsorbingTopic) {
  // Every word has mass only in topic 2, so all tokens end there and
  // theta[2] = (N + alpha) / (N + K alpha).
  std::vector<Vector> topics = {{0, 0, 0, 1}, {0, 0, 0, 1}, {0.5, 0.5, 0, 0}};
  std::vector<WordId> tokens = {0, 1, 0, 0, 1, 1, 0};
  auto config = small_config(3);
  config.alpha = 0.3;
  auto theta = fold_in(topics, tokens, config);
  ASSERT_TRUE(theta);
  const double n = 7;
  EXPECT_NEAR((*theta)[2], (n + 0.3) / (n + 3 * 0.3), 1e-12);
  EXPECT_NEAR((*theta)[0], 0.3 / (n + 0.9), 1e-12);
}

TEST(FoldIn, DeterministicAndUnscorable) {
  std::vector<Vector> topics = {{0.7, 0.2, 0.1}, {0.1, 0.2, 0.7}};
  std::vector<WordId> tokens = {0, 2, 2, 1, 0, 2};
  auto a = fold_in(topics, tokens, small_config(2, 4));
  auto b = fold_in(topics, tokens, small_config(2, 4));
  EXPECT_EQ(a, b);
  std::vector<WordId> outside = {5, 9};
  EXPECT_FALSE(fold_in(topics, outside, small_config(2)).has_value());
}

TEST(ScoreHeldout, CountsUnscorableAndOov) {
  std::vector<Vector> topics = {{0.5, 0.5}, {0.5, 0.5}};
  std::vector<Document> docs = {{"a", "s", {0, 1}, 2}, {"b", "s", {7}, 0}};
  auto score = score_heldout(topics, docs, small_config(2), 1);
  EXPECT_EQ(score.unscorable_documents, 1u);
  EXPECT_EQ(score.scored_tokens, 2u);
  EXPECT_EQ(score.oov_tokens, 3u);
  EXPECT_NEAR(score.perplexity, 2.0, 1e-12);
}

TEST(ScoreHeldout, ZeroProbabilityNamesDocument) {
  std::vector<Vector> topics = {{1.0, 0.0}};
  std::vector<Document> docs = {{"a", "s", {0}, 0}, {"b", "s", {0, 1}, 0}};
  try {
    score_heldout(topics, docs, small_config(1), 1);
    FAIL() << "expected ZeroProbabilityError";
  } catch (const ZeroProbabilityError& e) {
    EXPECT_EQ(e.doc(), 1u);
  }
}

}  // namespace
}  // namespace clda
