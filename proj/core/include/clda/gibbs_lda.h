#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clda/corpus.h"
#include "clda/rng.h"
#include "clda/types.h"

namespace clda {

struct SamplerConfig {
  std::size_t num_topics = 10;
  double alpha = 5.0;
  double beta = 0.01;
  std::size_t iterations = 500;
  std::uint64_t seed = 0;
  // Sweeps run over a held-out document during fold-in.
  std::size_t fold_in_iterations = 20;

  // alpha = 50 / K, beta = 0.01.
  static SamplerConfig with_defaults(std::size_t num_topics);

  // Throws ConfigError.
  void validate() const;
};

// Sufficient statistics of the collapsed sampler. Counts are stored
// word-major (word_topic[w * K + k]) so one token's K weights are contiguous.
struct TopicCounts {
  std::size_t num_topics = 0;
  std::size_t vocab_size = 0;
  std::vector<std::int64_t> word_topic;
  std::vector<std::int64_t> topic_totals;
  std::vector<std::int64_t> doc_topic;  // docs x K
  std::vector<std::int64_t> doc_lengths;

  std::size_t num_docs() const { return doc_lengths.size(); }
  std::int64_t topic_word(std::size_t k, WordId w) const { return word_topic[w * num_topics + k]; }
  std::int64_t doc_topic_count(std::size_t j, std::size_t k) const {
    return doc_topic[j * num_topics + k];
  }
};

struct SamplerState {
  TopicCounts counts;
  // z[j][i] is the topic of token i in document j.
  std::vector<std::vector<std::uint32_t>> z;
};

struct LocalTopicSet {
  std::string segment_key;
  std::vector<WordId> local_vocab;
  // L rows over the global vocabulary, each summing to one.
  std::vector<Vector> topics;
  std::vector<std::string> doc_ids;
  std::vector<std::size_t> doc_lengths;
  // One row of L proportions per training document.
  std::vector<Vector> doc_mixtures;
  TopicCounts counts;

  std::size_t num_topics() const { return topics.size(); }
};

SamplerState init_random(std::span<const Document> docs, std::size_t vocab_size,
                         const SamplerConfig& config, Rng& rng);

// Unnormalized conditional P(z = k | rest) for one token of `word` in
// document `doc`, assuming the token's own assignment is already removed.
void topic_weights(const TopicCounts& counts, std::size_t doc, WordId word,
                   const SamplerConfig& config, std::span<double> out);

// Removes token (doc, pos), draws a new topic and adds it back.
void resample_token(SamplerState& state, std::span<const Document> docs, std::size_t doc,
                    std::size_t pos, const SamplerConfig& config, Rng& rng,
                    std::span<double> scratch);

// One pass over every token in document order.
void gibbs_sweep(SamplerState& state, std::span<const Document> docs, const SamplerConfig& config,
                 Rng& rng);

// AD-LDA sweep. Document j belongs to shard j % shard_rngs.size(). Every
// shard samples against its own copy of the word-topic and topic totals
// taken at sweep start; the per-shard deltas are summed into the state in
// shard order afterwards.
void sharded_sweep(SamplerState& state, std::span<const Document> docs,
                   const SamplerConfig& config, std::span<Rng> shard_rngs,
                   std::size_t max_threads);

// phi[k][w] = (n_wk + beta) / (n_k + W beta)
std::vector<Vector> estimate_topics(const TopicCounts& counts, double beta);

// theta[j][k] = (n_jk + alpha) / (N_j + K alpha)
std::vector<Vector> estimate_mixtures(const TopicCounts& counts, double alpha);

LocalTopicSet make_local_topic_set(std::string segment_key, std::vector<WordId> local_vocab,
                                   std::vector<std::string> doc_ids, TopicCounts counts,
                                   double alpha, double beta);

// Drives init + sweeps. Sweep randomness for shard r comes from
// derive_seed(seed, r), initialization from seed itself, so a single-shard
// run is the serial sampler.
class GibbsSampler {
 public:
  GibbsSampler(std::span<const Document> docs, std::size_t vocab_size, SamplerConfig config,
               std::size_t num_shards = 1, std::size_t max_threads = 1);

  void sweep();
  std::size_t sweeps_done() const { return sweeps_; }
  const SamplerState& state() const { return state_; }
  const SamplerConfig& config() const { return config_; }

 private:
  std::span<const Document> docs_;
  SamplerConfig config_;
  std::size_t max_threads_;
  SamplerState state_;
  std::vector<Rng> rngs_;
  std::size_t sweeps_ = 0;
};

LocalTopicSet train(const Segment& segment, const SamplerConfig& config);

LocalTopicSet train_sharded(const Segment& segment, const SamplerConfig& config,
                            std::size_t num_shards, std::size_t max_threads);

// Estimates a held-out document's mixture with the topics frozen. Tokens
// whose id is outside the topics' dimension are ignored. Returns nullopt
// when no token is left to sample (an unscorable document).
std::optional<Vector> fold_in(std::span<const Vector> topics, std::span<const WordId> tokens,
                              const SamplerConfig& config);

struct HeldoutScore {
  double perplexity = 0;
  std::size_t documents = 0;
  std::size_t scored_documents = 0;
  std::size_t scored_tokens = 0;
  std::size_t oov_tokens = 0;
  std::size_t unscorable_documents = 0;
};

// Folds every document in, then evaluates perplexity with
// P(w|d) = sum_k theta_dk phi_kw. Document i is folded in with seed
// derive_seed(seed, i). `oov_tokens` adds the documents' recorded
// encoding drops to the tokens outside the topics' vocabulary.
HeldoutScore score_heldout(std::span<const Vector> topics, std::span<const Document> docs,
                           const SamplerConfig& config, std::uint64_t seed,
                           std::size_t max_threads = 1);

}  // namespace clda
