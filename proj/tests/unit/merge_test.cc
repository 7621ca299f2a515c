#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "clda/errors.h"
#include "clda/merge.h"

namespace clda {
namespace {

LocalTopicSet fake_local(const std::string& key, std::size_t L, std::size_t W, double offset) {
  LocalTopicSet local;
  local.segment_key = key;
  for (std::size_t w = 0; w < W; ++w) local.local_vocab.push_back(static_cast<WordId>(w));
  for (std::size_t i = 0; i < L; ++i) {
    Vector row(W);
    for (std::size_t w = 0; w < W; ++w) row[w] = 1.0 + offset + static_cast<double>((i + 1) * (w + 2) % 7);
    local.topics.push_back(row);
  }
  return local;
}

TEST(AlignTopic, ZeroFillsMissingWords) {
  std::vector<WordId> vocab = {0, 2};
  EXPECT_EQ(align_topic(Vector{0.7, 0.3}, vocab, 3), (Vector{0.7, 0, 0.3}));
}

TEST(AlignTopic, GlobalIndexedInput) {
  std::vector<WordId> vocab = {0, 2};
  // Mass on word 1 is outside the segment and dropped.
  EXPECT_EQ(align_topic(Vector{0.6, 0.1, 0.3}, vocab, 3), (Vector{0.6, 0, 0.3}));
}

TEST(AlignTopic, FullVocabularyIsIdentity) {
  std::vector<WordId> vocab = {0, 1, 2};
  Vector topic = {0.2, 0.5, 0.3};
  EXPECT_EQ(align_topic(topic, vocab, 3), topic);
  EXPECT_EQ(align_topic(Vector{0, 0, 0}, vocab, 3), (Vector{0, 0, 0}));
}

TEST(Smooth, AddsEpsilon) {
  std::vector<Vector> rows = {{0, 1}};
  EXPECT_EQ(smooth(rows, 0.0), rows);
  EXPECT_EQ(smooth(rows, 0.5), (std::vector<Vector>{{0.5, 1.5}}));
  EXPECT_THROW(smooth(rows, -1.0), ConfigError);
}

TEST(Smooth, ZeroRowBecomesUniformUnitVector) {
  std::vector<Vector> rows = {Vector(9, 0.0)};
  auto smoothed = smooth(rows, 0.25);
  ASSERT_TRUE(normalize_row(smoothed[0]));
  for (double v : smoothed[0]) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Normalize, ThreeFourFive) {
  Vector row = {3, 4};
  ASSERT_TRUE(normalize_row(row));
  EXPECT_DOUBLE_EQ(row[0], 0.6);
  EXPECT_DOUBLE_EQ(row[1], 0.8);
  Vector again = row;
  normalize_row(again);
  EXPECT_NEAR(again[0], 0.6, 1e-16);
  EXPECT_NEAR(again[1], 0.8, 1e-16);
}

TEST(Normalize, ZeroRowIsDiscarded) {
  TopicMatrix m;
  m.dim = 2;
  m.rows = {{0, 0}, {1, 1}};
  m.provenance = {{"a", 0}, {"a", 1}};
  auto out = normalize(std::move(m));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.provenance[0], (Provenance{"a", 1}));
  ASSERT_EQ(out.discarded.size(), 1u);
  EXPECT_EQ(out.discarded[0], (Provenance{"a", 0}));
}

TEST(MergeAll, ConcatenatesWithProvenance) {
  std::vector<LocalTopicSet> locals = {fake_local("s1", 3, 5, 0), fake_local("s2", 3, 5, 1)};
  auto m = merge_all(locals, 5);
  ASSERT_EQ(m.size(), 6u);
  EXPECT_EQ(m.provenance.front(), (Provenance{"s1", 0}));
  EXPECT_EQ(m.provenance.back(), (Provenance{"s2", 2}));
  for (const auto& row : m.rows) {
    double norm = 0;
    for (double v : row) norm += v * v;
    EXPECT_NEAR(norm, 1.0, 1e-12);
  }
}

TEST(MergeAll, SegmentCountTimesLocalTopics) {
  std::vector<LocalTopicSet> locals;
  for (int s = 0; s < 17; ++s) locals.push_back(fake_local("y" + std::to_string(s), 50, 6, s));
  EXPECT_EQ(merge_all(locals, 6, 0.0, 4).size(), 850u);
}

TEST(MergeAll, OrderIndependentUpToProvenanceSort) {
  std::vector<LocalTopicSet> locals = {fake_local("a", 2, 4, 0), fake_local("b", 2, 4, 3),
                                       fake_local("c", 2, 4, 5)};
  auto forward = merge_all(locals, 4);
  std::reverse(locals.begin(), locals.end());
  auto backward = merge_all(locals, 4);
  auto sorted = [](const TopicMatrix& m) {
    std::vector<std::pair<std::pair<std::string, std::size_t>, Vector>> out;
    for (std::size_t r = 0; r < m.size(); ++r) {
      out.push_back({{m.provenance[r].segment_key, m.provenance[r].local_index}, m.rows[r]});
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  EXPECT_EQ(sorted(forward), sorted(backward));
}

}  // namespace
}  // namespace clda
