#include "clda/corpus.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>

#include "clda/errors.h"
#include "clda/rng.h"

namespace clda {

Vocabulary::Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    auto [it, inserted] = index_.emplace(words_[i], static_cast<WordId>(i));
    if (!inserted) throw CorruptionError("duplicate vocabulary word '" + words_[i] + "'");
  }
}

std::optional<WordId> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Corpus::token_count() const {
  std::size_t total = 0;
  for (const auto& doc : documents) total += doc.tokens.size();
  return total;
}

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

std::optional<double> parse_number(const std::string& key) {
  double value = 0;
  const char* end = key.data() + key.size();
  auto [ptr, ec] = std::from_chars(key.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view raw_text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : raw_text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vocabulary build_vocabulary(std::span<const std::vector<std::string>> docs,
                            const std::unordered_set<std::string>& stopwords,
                            std::size_t min_count, double min_doc_fraction) {
  if (!(min_doc_fraction >= 0.0 && min_doc_fraction <= 1.0)) {
    throw ConfigError("min_doc_fraction must be in [0, 1]");
  }
  struct Stats {
    std::size_t count = 0;
    std::size_t docs = 0;
    std::size_t last_doc = SIZE_MAX;
  };
  std::map<std::string, Stats, std::less<>> stats;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& token : docs[d]) {
      if (stopwords.contains(token)) continue;
      auto& s = stats[token];
      ++s.count;
      if (s.last_doc != d) {
        s.last_doc = d;
        ++s.docs;
      }
    }
  }

  // Guard against 0.1 * 30 evaluating to 3.0000000000000004.
  const auto min_docs = static_cast<std::size_t>(
      std::ceil(min_doc_fraction * static_cast<double>(docs.size()) - 1e-9));

  std::vector<std::string> kept;
  for (const auto& [word, s] : stats) {
    if (s.count >= min_count && s.docs >= min_docs) kept.push_back(word);
  }
  if (kept.empty()) throw EmptyVocabularyError();
  return Vocabulary(std::move(kept));
}

std::vector<std::string> order_segments(std::vector<std::string> keys, SegmentOrder order) {
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  if (order == SegmentOrder::kNumeric) {
    std::stable_sort(keys.begin(), keys.end(), [](const std::string& a, const std::string& b) {
      auto na = parse_number(a);
      auto nb = parse_number(b);
      if (na && nb) return *na < *nb;
      // Numbers before non-numbers; the preceding sort orders the rest.
      return na.has_value() && !nb.has_value();
    });
  }
  return keys;
}

std::vector<std::string> segment_keys(std::span<const Document> documents, SegmentOrder order) {
  std::vector<std::string> keys;
  keys.reserve(documents.size());
  for (const auto& doc : documents) keys.push_back(doc.segment_key);
  return order_segments(std::move(keys), order);
}

EncodeResult encode(std::span<const TokenizedDocument> docs,
                    std::shared_ptr<const Vocabulary> vocabulary, SegmentOrder order) {
  if (!vocabulary || vocabulary->empty()) throw EmptyVocabularyError();
  EncodeResult result;
  result.corpus.vocabulary = vocabulary;
  for (const auto& raw : docs) {
    Document doc{raw.doc_id, raw.segment_key, {}, 0};
    doc.tokens.reserve(raw.tokens.size());
    for (const auto& token : raw.tokens) {
      if (auto id = vocabulary->find(token)) {
        doc.tokens.push_back(*id);
      } else {
        ++doc.oov_tokens;
      }
    }
    result.dropped_tokens += doc.oov_tokens;
    if (doc.tokens.empty()) {
      ++result.dropped_documents;
      continue;
    }
    result.corpus.documents.push_back(std::move(doc));
  }
  result.corpus.segments = segment_keys(result.corpus.documents, order);
  return result;
}

std::vector<std::string> decode(const Document& doc, const Vocabulary& vocabulary) {
  std::vector<std::string> words;
  words.reserve(doc.tokens.size());
  for (WordId id : doc.tokens) words.push_back(vocabulary.word(id));
  return words;
}

std::vector<WordId> occurring_words(std::span<const Document> documents) {
  std::vector<WordId> words;
  for (const auto& doc : documents) words.insert(words.end(), doc.tokens.begin(), doc.tokens.end());
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  return words;
}

std::vector<Segment> split_corpus(const Corpus& corpus) {
  std::vector<Segment> segments(corpus.segments.size());
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t s = 0; s < corpus.segments.size(); ++s) {
    position.emplace(corpus.segments[s], s);
    segments[s].key = corpus.segments[s];
    segments[s].index = s;
    segments[s].corpus.vocabulary = corpus.vocabulary;
    segments[s].corpus.segments = {corpus.segments[s]};
  }
  for (const auto& doc : corpus.documents) {
    auto it = position.find(doc.segment_key);
    if (it == position.end()) {
      throw CorruptionError("document '" + doc.doc_id + "' has unknown segment key '" +
                            doc.segment_key + "'");
    }
    segments[it->second].corpus.documents.push_back(doc);
  }
  for (auto& segment : segments) segment.local_vocab = occurring_words(segment.corpus.documents);
  return segments;
}

Segment whole_corpus(const Corpus& corpus, std::string key) {
  Segment segment;
  segment.key = std::move(key);
  segment.corpus = corpus;
  segment.local_vocab = occurring_words(corpus.documents);
  return segment;
}

HoldoutSplit holdout_split(const Corpus& corpus, double holdout_fraction, std::uint64_t seed) {
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
    throw ConfigError("holdout_fraction must be in [0, 1)");
  }
  std::unordered_map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    members[corpus.documents[i].segment_key].push_back(i);
  }

  std::vector<bool> is_test(corpus.documents.size(), false);
  for (std::size_t s = 0; s < corpus.segments.size(); ++s) {
    auto it = members.find(corpus.segments[s]);
    if (it == members.end()) continue;
    auto& indices = it->second;
    const auto n_test = static_cast<std::size_t>(
        std::llround(holdout_fraction * static_cast<double>(indices.size())));
    Rng rng(derive_seed(seed, s));
    rng.shuffle(std::span(indices));
    for (std::size_t t = 0; t < n_test; ++t) is_test[indices[t]] = true;
  }

  HoldoutSplit split;
  split.train.vocabulary = corpus.vocabulary;
  split.test.vocabulary = corpus.vocabulary;
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    (is_test[i] ? split.test : split.train).documents.push_back(corpus.documents[i]);
  }
  auto present = [&](const Corpus& part) {
    std::unordered_set<std::string> keys;
    for (const auto& doc : part.documents) keys.insert(doc.segment_key);
    std::vector<std::string> ordered;
    for (const auto& key : corpus.segments) {
      if (keys.contains(key)) ordered.push_back(key);
    }
    return ordered;
  };
  split.train.segments = present(split.train);
  split.test.segments = present(split.test);
  return split;
}

}  // namespace clda
