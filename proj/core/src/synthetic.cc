#include "clda/synthetic.h"

#include <cmath>
#include <cstdio>
#include <random>

#include "clda/errors.h"
#include "clda/rng.h"

namespace clda {

namespace {

std::string padded(const char* prefix, std::size_t value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, value);
  return buf;
}

std::size_t sample(const Vector& probs, Rng& rng) {
  double u = rng.uniform();
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    if (u < probs[i]) return i;
    u -= probs[i];
  }
  return probs.size() - 1;
}

}  // namespace

PlantedCorpus make_planted_corpus(const PlantedCorpusSpec& spec) {
  if (spec.num_topics < 1 || spec.vocab_size < spec.num_topics) {
    throw ConfigError("planted corpus needs 1 <= num_topics <= vocab_size");
  }
  if (spec.num_segments < 1 || spec.num_documents < spec.num_segments) {
    throw ConfigError("planted corpus needs at least one document per segment");
  }
  if (!spec.active_topics.empty() && spec.active_topics.size() != spec.num_segments) {
    throw ConfigError("active_topics must list every segment");
  }

  PlantedCorpus planted;
  const std::size_t W = spec.vocab_size;
  const std::size_t T = spec.num_topics;
  planted.topics.assign(T, Vector(W, 0.0));
  for (std::size_t k = 0; k < T; ++k) {
    const std::size_t begin = k * W / T;
    const std::size_t end = (k + 1) * W / T;
    double total = 0;
    for (std::size_t w = begin; w < end; ++w) {
      planted.topics[k][w] = 1.0 / std::pow(static_cast<double>(w - begin + 1), spec.decay);
      total += planted.topics[k][w];
    }
    for (std::size_t w = begin; w < end; ++w) planted.topics[k][w] /= total;
  }

  std::vector<std::string> words;
  words.reserve(W);
  const int width = static_cast<int>(std::to_string(W - 1).size());
  for (std::size_t w = 0; w < W; ++w) words.push_back(padded("w", w, width));
  auto vocabulary = std::make_shared<const Vocabulary>(std::move(words));

  Rng rng(spec.seed);
  std::gamma_distribution<double> gamma(spec.doc_alpha, 1.0);
  auto& corpus = planted.corpus;
  corpus.vocabulary = vocabulary;
  const int seg_width = static_cast<int>(std::to_string(spec.num_segments - 1).size());
  const int doc_width = static_cast<int>(std::to_string(spec.num_documents - 1).size());
  for (std::size_t s = 0; s < spec.num_segments; ++s) {
    corpus.segments.push_back(padded("seg", s, seg_width));
  }

  for (std::size_t j = 0; j < spec.num_documents; ++j) {
    const std::size_t s = j * spec.num_segments / spec.num_documents;
    std::vector<std::size_t> active;
    if (spec.active_topics.empty()) {
      for (std::size_t k = 0; k < T; ++k) active.push_back(k);
    } else {
      active = spec.active_topics[s];
    }

    // theta ~ Dir(doc_alpha) over the active topics.
    Vector theta(T, 0.0);
    double total = 0;
    for (std::size_t k : active) {
      theta[k] = gamma(rng.engine());
      total += theta[k];
    }
    if (!(total > 0)) {
      theta[active[rng.below(active.size())]] = 1.0;
      total = 1.0;
    }
    for (double& t : theta) t /= total;

    const std::size_t lo = std::max<std::size_t>(1, spec.doc_length / 2);
    const std::size_t length = lo + rng.below(spec.doc_length + 1);
    Document doc;
    doc.doc_id = padded("d", j, doc_width);
    doc.segment_key = corpus.segments[s];
    doc.tokens.reserve(length);
    for (std::size_t i = 0; i < length; ++i) {
      const std::size_t z = sample(theta, rng);
      doc.tokens.push_back(static_cast<WordId>(sample(planted.topics[z], rng)));
    }
    corpus.documents.push_back(std::move(doc));
  }
  return planted;
}

}  // namespace clda
