#include <benchmark/benchmark.h>

#include "clda/gibbs_lda.h"
#include "clda/merge.h"
#include "clda/metrics.h"
#include "clda/spherical_kmeans.h"
#include "clda/synthetic.h"

namespace {

const clda::PlantedCorpus& corpus() {
  static const clda::PlantedCorpus planted = clda::make_planted_corpus({});
  return planted;
}

// One sweep over the 2,000-document planted corpus; range(0) is the shard count.
void BM_GibbsSweep(benchmark::State& state) {
  const auto& docs = corpus().corpus.documents;
  auto config = clda::SamplerConfig::with_defaults(10);
  const auto shards = static_cast<std::size_t>(state.range(0));
  clda::GibbsSampler sampler(docs, corpus().corpus.vocab_size(), config, shards, shards);
  for (auto _ : state) sampler.sweep();
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(corpus().corpus.token_count()));
}
BENCHMARK(BM_GibbsSweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

std::vector<clda::LocalTopicSet> locals(std::size_t segments, std::size_t L) {
  std::vector<clda::LocalTopicSet> out;
  clda::Rng rng(3);
  const std::size_t W = 2000;
  for (std::size_t s = 0; s < segments; ++s) {
    clda::LocalTopicSet local;
    local.segment_key = "s" + std::to_string(s);
    for (std::size_t w = 0; w < W; w += 2) local.local_vocab.push_back(static_cast<clda::WordId>(w));
    for (std::size_t i = 0; i < L; ++i) {
      clda::Vector t(W, 0.0);
      for (auto w : local.local_vocab) t[w] = rng.uniform();
      local.topics.push_back(std::move(t));
    }
    out.push_back(std::move(local));
  }
  return out;
}

void BM_MergeAll(benchmark::State& state) {
  const auto input = locals(static_cast<std::size_t>(state.range(0)), 50);
  for (auto _ : state) benchmark::DoNotOptimize(clda::merge_all(input, 2000, 1e-6));
}
BENCHMARK(BM_MergeAll)->Arg(4)->Arg(17)->Unit(benchmark::kMillisecond);

void BM_KMeansRestarts(benchmark::State& state) {
  const auto matrix = clda::merge_all(locals(17, 50), 2000);
  const auto K = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        clda::multi_restart(matrix.rows, K, 3, 7, clda::InitMode::kRandomTopics));
  }
}
BENCHMARK(BM_KMeansRestarts)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_GreedyMatch(benchmark::State& state) {
  const auto& topics = corpus().topics;
  std::vector<clda::WordSet> sets;
  for (std::size_t r = 0; r < 8; ++r) {
    for (const auto& t : topics) sets.push_back(clda::top_words(t, 20));
  }
  for (auto _ : state) benchmark::DoNotOptimize(clda::greedy_match(sets, sets));
}
BENCHMARK(BM_GreedyMatch);

}  // namespace

BENCHMARK_MAIN();
