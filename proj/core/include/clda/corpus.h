#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "clda/types.h"

namespace clda {

// Ordered set of unique words; a word's id is its position.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Throws CorruptionError on duplicate words.
  explicit Vocabulary(std::vector<std::string> words);

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  const std::string& word(WordId id) const { return words_.at(id); }
  const std::vector<std::string>& words() const { return words_; }
  std::optional<WordId> find(std::string_view word) const;

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> index_;
};

struct TokenizedDocument {
  std::string doc_id;
  std::string segment_key;
  std::vector<std::string> tokens;
};

struct Document {
  std::string doc_id;
  std::string segment_key;
  std::vector<WordId> tokens;
  // Tokens removed during encoding because they were not in the vocabulary.
  std::size_t oov_tokens = 0;
};

enum class SegmentOrder { kLexicographic, kNumeric };

struct Corpus {
  std::shared_ptr<const Vocabulary> vocabulary;
  std::vector<Document> documents;
  // Distinct segment keys in canonical order.
  std::vector<std::string> segments;

  std::size_t vocab_size() const { return vocabulary ? vocabulary->size() : 0; }
  std::size_t token_count() const;
};

// One partition of a corpus. `local_vocab` lists, ascending, the word ids
// that actually occur in the segment's documents.
struct Segment {
  std::string key;
  std::size_t index = 0;
  Corpus corpus;
  std::vector<WordId> local_vocab;
};

struct EncodeResult {
  Corpus corpus;
  std::size_t dropped_documents = 0;
  std::size_t dropped_tokens = 0;
};

struct HoldoutSplit {
  Corpus train;
  Corpus test;
};

// Lowercases ASCII letters and splits on runs of characters that are not
// ASCII alphanumerics. Bytes >= 0x80 are kept as word characters so UTF-8
// words survive intact.
std::vector<std::string> tokenize(std::string_view raw_text);

// Keeps words that are not stopwords, occur at least `min_count` times and
// appear in at least ceil(min_doc_fraction * docs.size()) documents.
// Words are ordered lexicographically. Throws EmptyVocabularyError when
// nothing survives.
Vocabulary build_vocabulary(std::span<const std::vector<std::string>> docs,
                            const std::unordered_set<std::string>& stopwords,
                            std::size_t min_count, double min_doc_fraction);

// Maps tokens to ids, dropping out-of-vocabulary tokens and documents that
// end up empty.
EncodeResult encode(std::span<const TokenizedDocument> docs,
                    std::shared_ptr<const Vocabulary> vocabulary,
                    SegmentOrder order = SegmentOrder::kLexicographic);

std::vector<std::string> decode(const Document& doc, const Vocabulary& vocabulary);

// Distinct keys sorted in canonical order. Numeric order falls back to
// lexicographic comparison for keys that do not parse as numbers.
std::vector<std::string> order_segments(std::vector<std::string> keys, SegmentOrder order);

// Returns the distinct segment keys of `documents`, in canonical order.
std::vector<std::string> segment_keys(std::span<const Document> documents, SegmentOrder order);

std::vector<Segment> split_corpus(const Corpus& corpus);

// The whole corpus as a single segment (used for full-corpus LDA).
Segment whole_corpus(const Corpus& corpus, std::string key = "*");

// Stratified per segment: round(holdout_fraction * n_s) documents of each
// segment go to the test side. Both sides keep the input document order.
HoldoutSplit holdout_split(const Corpus& corpus, double holdout_fraction, std::uint64_t seed);

std::vector<WordId> occurring_words(std::span<const Document> documents);

}  // namespace clda
