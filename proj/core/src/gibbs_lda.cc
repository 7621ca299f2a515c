#include "clda/gibbs_lda.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "clda/errors.h"
#include "clda/metrics.h"
#include "clda/parallel.h"

namespace clda {

SamplerConfig SamplerConfig::with_defaults(std::size_t num_topics) {
  SamplerConfig config;
  config.num_topics = num_topics;
  config.alpha = num_topics > 0 ? 50.0 / static_cast<double>(num_topics) : 0.0;
  config.beta = 0.01;
  return config;
}

void SamplerConfig::validate() const {
  if (num_topics < 1) throw ConfigError("number of topics must be at least 1");
  if (!(alpha > 0)) throw ConfigError("alpha must be positive");
  if (!(beta > 0)) throw ConfigError("beta must be positive");
  if (iterations < 1) throw ConfigError("iterations must be at least 1");
  if (fold_in_iterations < 1) throw ConfigError("fold-in iterations must be at least 1");
}

namespace {

// Draws k with probability weights[k] / sum(weights). The weights are
// turned into a running sum in place.
std::size_t draw(std::span<double> weights, Rng& rng) {
  double total = 0;
  for (double& w : weights) {
    total += w;
    w = total;
  }
  const double u = rng.uniform() * total;
  for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
    if (u < weights[k]) return k;
  }
  return weights.size() - 1;
}

// Samples documents[j] for j in `doc_indices` against the given word-topic
// and topic totals, which the caller owns. Document-side counts and z are
// written directly into `state`.
void sample_documents(SamplerState& state, std::span<const Document> docs,
                      std::span<const std::size_t> doc_indices, std::span<std::int64_t> word_topic,
                      std::span<std::int64_t> topic_totals, const SamplerConfig& config, Rng& rng) {
  const std::size_t K = state.counts.num_topics;
  const double beta = config.beta;
  const double alpha = config.alpha;
  const double w_beta = static_cast<double>(state.counts.vocab_size) * beta;
  std::vector<double> weights(K);

  for (std::size_t j : doc_indices) {
    const auto& tokens = docs[j].tokens;
    auto& z = state.z[j];
    std::int64_t* doc_topic = state.counts.doc_topic.data() + j * K;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const WordId w = tokens[i];
      std::int64_t* wt = word_topic.data() + static_cast<std::size_t>(w) * K;
      const std::uint32_t old = z[i];
      --wt[old];
      --topic_totals[old];
      --doc_topic[old];
      for (std::size_t k = 0; k < K; ++k) {
        weights[k] = (static_cast<double>(wt[k]) + beta) /
                     (static_cast<double>(topic_totals[k]) + w_beta) *
                     (static_cast<double>(doc_topic[k]) + alpha);
      }
      const auto fresh = static_cast<std::uint32_t>(draw(weights, rng));
      z[i] = fresh;
      ++wt[fresh];
      ++topic_totals[fresh];
      ++doc_topic[fresh];
    }
  }
}

}  // namespace

SamplerState init_random(std::span<const Document> docs, std::size_t vocab_size,
                         const SamplerConfig& config, Rng& rng) {
  config.validate();
  if (docs.empty()) throw ConfigError("cannot train on an empty corpus");
  const std::size_t K = config.num_topics;

  SamplerState state;
  auto& c = state.counts;
  c.num_topics = K;
  c.vocab_size = vocab_size;
  c.word_topic.assign(vocab_size * K, 0);
  c.topic_totals.assign(K, 0);
  c.doc_topic.assign(docs.size() * K, 0);
  c.doc_lengths.resize(docs.size());
  state.z.resize(docs.size());

  for (std::size_t j = 0; j < docs.size(); ++j) {
    const auto& tokens = docs[j].tokens;
    c.doc_lengths[j] = static_cast<std::int64_t>(tokens.size());
    state.z[j].resize(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i] >= vocab_size) {
        throw CorruptionError("document '" + docs[j].doc_id + "' references word id " +
                              std::to_string(tokens[i]) + " beyond the vocabulary");
      }
      const auto k = static_cast<std::uint32_t>(rng.below(K));
      state.z[j][i] = k;
      ++c.word_topic[static_cast<std::size_t>(tokens[i]) * K + k];
      ++c.topic_totals[k];
      ++c.doc_topic[j * K + k];
    }
  }
  return state;
}

void topic_weights(const TopicCounts& counts, std::size_t doc, WordId word,
                   const SamplerConfig& config, std::span<double> out) {
  const std::size_t K = counts.num_topics;
  const double w_beta = static_cast<double>(counts.vocab_size) * config.beta;
  for (std::size_t k = 0; k < K; ++k) {
    out[k] = (static_cast<double>(counts.topic_word(k, word)) + config.beta) /
             (static_cast<double>(counts.topic_totals[k]) + w_beta) *
             (static_cast<double>(counts.doc_topic_count(doc, k)) + config.alpha);
  }
}

void resample_token(SamplerState& state, std::span<const Document> docs, std::size_t doc,
                    std::size_t pos, const SamplerConfig& config, Rng& rng,
                    std::span<double> scratch) {
  auto& c = state.counts;
  const std::size_t K = c.num_topics;
  const WordId w = docs[doc].tokens[pos];
  const std::uint32_t old = state.z[doc][pos];
  --c.word_topic[w * K + old];
  --c.topic_totals[old];
  --c.doc_topic[doc * K + old];
  auto weights = scratch.first(K);
  topic_weights(c, doc, w, config, weights);
  const auto fresh = static_cast<std::uint32_t>(draw(weights, rng));
  state.z[doc][pos] = fresh;
  ++c.word_topic[w * K + fresh];
  ++c.topic_totals[fresh];
  ++c.doc_topic[doc * K + fresh];
}

void gibbs_sweep(SamplerState& state, std::span<const Document> docs, const SamplerConfig& config,
                 Rng& rng) {
  std::vector<std::size_t> all(docs.size());
  std::iota(all.begin(), all.end(), 0);
  sample_documents(state, docs, all, state.counts.word_topic, state.counts.topic_totals, config,
                   rng);
}

void sharded_sweep(SamplerState& state, std::span<const Document> docs,
                   const SamplerConfig& config, std::span<Rng> shard_rngs,
                   std::size_t max_threads) {
  const std::size_t shards = shard_rngs.size();
  if (shards == 0) throw ConfigError("number of shards must be at least 1");
  if (shards == 1) {
    gibbs_sweep(state, docs, config, shard_rngs[0]);
    return;
  }

  std::vector<std::vector<std::size_t>> members(shards);
  for (std::size_t j = 0; j < docs.size(); ++j) members[j % shards].push_back(j);

  const auto& frozen_word_topic = state.counts.word_topic;
  const auto& frozen_totals = state.counts.topic_totals;
  std::vector<std::vector<std::int64_t>> local_word_topic(shards);
  std::vector<std::vector<std::int64_t>> local_totals(shards);

  parallel_for(shards, max_threads, [&](std::size_t r) {
    local_word_topic[r] = frozen_word_topic;
    local_totals[r] = frozen_totals;
    sample_documents(state, docs, members[r], local_word_topic[r], local_totals[r], config,
                     shard_rngs[r]);
  });

  // Ordered reduction: global += sum_r (local_r - frozen).
  auto reduce = [shards](std::vector<std::int64_t>& global,
                         const std::vector<std::vector<std::int64_t>>& locals) {
    std::vector<std::int64_t> merged = global;
    for (std::size_t r = 0; r < shards; ++r) {
      for (std::size_t i = 0; i < merged.size(); ++i) merged[i] += locals[r][i] - global[i];
    }
    global = std::move(merged);
  };
  reduce(state.counts.word_topic, local_word_topic);
  reduce(state.counts.topic_totals, local_totals);
}

std::vector<Vector> estimate_topics(const TopicCounts& counts, double beta) {
  const std::size_t K = counts.num_topics;
  const std::size_t W = counts.vocab_size;
  const double w_beta = static_cast<double>(W) * beta;
  std::vector<Vector> topics(K, Vector(W));
  for (std::size_t k = 0; k < K; ++k) {
    const double denom = static_cast<double>(counts.topic_totals[k]) + w_beta;
    for (std::size_t w = 0; w < W; ++w) {
      topics[k][w] = (static_cast<double>(counts.word_topic[w * K + k]) + beta) / denom;
    }
  }
  return topics;
}

std::vector<Vector> estimate_mixtures(const TopicCounts& counts, double alpha) {
  const std::size_t K = counts.num_topics;
  const double k_alpha = static_cast<double>(K) * alpha;
  std::vector<Vector> mixtures(counts.num_docs(), Vector(K));
  for (std::size_t j = 0; j < counts.num_docs(); ++j) {
    const double denom = static_cast<double>(counts.doc_lengths[j]) + k_alpha;
    for (std::size_t k = 0; k < K; ++k) {
      mixtures[j][k] = (static_cast<double>(counts.doc_topic[j * K + k]) + alpha) / denom;
    }
  }
  return mixtures;
}

LocalTopicSet make_local_topic_set(std::string segment_key, std::vector<WordId> local_vocab,
                                   std::vector<std::string> doc_ids, TopicCounts counts,
                                   double alpha, double beta) {
  LocalTopicSet local;
  local.segment_key = std::move(segment_key);
  local.local_vocab = std::move(local_vocab);
  local.topics = estimate_topics(counts, beta);
  local.doc_mixtures = estimate_mixtures(counts, alpha);
  local.doc_ids = std::move(doc_ids);
  local.doc_lengths.assign(counts.doc_lengths.begin(), counts.doc_lengths.end());
  local.counts = std::move(counts);
  return local;
}

GibbsSampler::GibbsSampler(std::span<const Document> docs, std::size_t vocab_size,
                           SamplerConfig config, std::size_t num_shards,
                           std::size_t max_threads)
    : docs_(docs), config_(config), max_threads_(max_threads) {
  if (num_shards < 1) throw ConfigError("number of shards must be at least 1");
  Rng init_rng(config_.seed);
  state_ = init_random(docs_, vocab_size, config_, init_rng);
  rngs_.reserve(num_shards);
  for (std::size_t r = 0; r < num_shards; ++r) rngs_.emplace_back(derive_seed(config_.seed, r));
}

void GibbsSampler::sweep() {
  sharded_sweep(state_, docs_, config_, rngs_, max_threads_);
  ++sweeps_;
}

LocalTopicSet train_sharded(const Segment& segment, const SamplerConfig& config,
                            std::size_t num_shards, std::size_t max_threads) {
  const auto& docs = segment.corpus.documents;
  GibbsSampler sampler(docs, segment.corpus.vocab_size(), config, num_shards, max_threads);
  for (std::size_t it = 0; it < config.iterations; ++it) sampler.sweep();

  std::vector<std::string> doc_ids;
  doc_ids.reserve(docs.size());
  for (const auto& doc : docs) doc_ids.push_back(doc.doc_id);
  return make_local_topic_set(segment.key, segment.local_vocab, std::move(doc_ids),
                              sampler.state().counts, config.alpha, config.beta);
}

LocalTopicSet train(const Segment& segment, const SamplerConfig& config) {
  return train_sharded(segment, config, 1, 1);
}

std::optional<Vector> fold_in(std::span<const Vector> topics, std::span<const WordId> tokens,
                              const SamplerConfig& config) {
  if (topics.empty()) throw ConfigError("fold-in needs at least one topic");
  const std::size_t K = topics.size();
  const std::size_t W = topics.front().size();

  std::vector<WordId> scored;
  scored.reserve(tokens.size());
  for (WordId w : tokens) {
    if (w < W) scored.push_back(w);
  }
  if (scored.empty()) return std::nullopt;

  Rng rng(config.seed);
  std::vector<std::uint32_t> z(scored.size());
  std::vector<std::int64_t> doc_topic(K, 0);
  for (auto& zi : z) {
    zi = static_cast<std::uint32_t>(rng.below(K));
    ++doc_topic[zi];
  }

  std::vector<double> weights(K);
  for (std::size_t sweep = 0; sweep < config.fold_in_iterations; ++sweep) {
    for (std::size_t i = 0; i < scored.size(); ++i) {
      --doc_topic[z[i]];
      double total = 0;
      for (std::size_t k = 0; k < K; ++k) {
        weights[k] = topics[k][scored[i]] * (static_cast<double>(doc_topic[k]) + config.alpha);
        total += weights[k];
      }
      // A word no topic can emit carries no information; fall back to the prior.
      if (!(total > 0)) {
        for (std::size_t k = 0; k < K; ++k) {
          weights[k] = static_cast<double>(doc_topic[k]) + config.alpha;
        }
      }
      z[i] = static_cast<std::uint32_t>(draw(weights, rng));
      ++doc_topic[z[i]];
    }
  }

  const double denom = static_cast<double>(scored.size()) + static_cast<double>(K) * config.alpha;
  Vector theta(K);
  for (std::size_t k = 0; k < K; ++k) {
    theta[k] = (static_cast<double>(doc_topic[k]) + config.alpha) / denom;
  }
  return theta;
}

HeldoutScore score_heldout(std::span<const Vector> topics, std::span<const Document> docs,
                           const SamplerConfig& config, std::uint64_t seed,
                           std::size_t max_threads) {
  if (topics.empty()) throw ConfigError("scoring needs at least one topic");
  const std::size_t W = topics.front().size();
  std::vector<std::optional<Vector>> token_probs(docs.size());

  parallel_for(docs.size(), max_threads, [&](std::size_t d) {
    SamplerConfig doc_config = config;
    doc_config.seed = derive_seed(seed, d);
    auto theta = fold_in(topics, docs[d].tokens, doc_config);
    if (!theta) return;
    Vector probs;
    probs.reserve(docs[d].tokens.size());
    for (WordId w : docs[d].tokens) {
      if (w >= W) continue;
      double p = 0;
      for (std::size_t k = 0; k < topics.size(); ++k) p += (*theta)[k] * topics[k][w];
      probs.push_back(p);
    }
    token_probs[d] = std::move(probs);
  });

  HeldoutScore score;
  score.documents = docs.size();
  std::vector<Vector> scorable;
  std::vector<std::size_t> origin;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    score.oov_tokens += docs[d].oov_tokens;
    std::size_t in_vocab = 0;
    for (WordId w : docs[d].tokens) in_vocab += w < W ? 1 : 0;
    score.oov_tokens += docs[d].tokens.size() - in_vocab;
    if (!token_probs[d]) {
      ++score.unscorable_documents;
      continue;
    }
    ++score.scored_documents;
    score.scored_tokens += token_probs[d]->size();
    scorable.push_back(std::move(*token_probs[d]));
    origin.push_back(d);
  }
  if (scorable.empty()) throw DomainError("no scorable held-out documents");
  try {
    score.perplexity = perplexity(scorable);
  } catch (const ZeroProbabilityError& e) {
    throw ZeroProbabilityError(origin[e.doc()], e.token());
  }
  return score;
}

}  // namespace clda
