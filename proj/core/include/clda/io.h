#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "clda/corpus.h"
#include "clda/dynamics.h"
#include "clda/gibbs_lda.h"
#include "clda/merge.h"
#include "clda/metrics.h"
#include "clda/spherical_kmeans.h"

namespace clda::io {

namespace fs = std::filesystem;

// Throws MissingArtifactError if the file does not exist.
std::vector<std::string> read_lines(const fs::path& path);
void write_lines(const fs::path& path, std::span<const std::string> lines);

// One word per line; line number = word id.
Vocabulary read_vocabulary(const fs::path& path);
void write_vocabulary(const fs::path& path, const Vocabulary& vocabulary);

// `doc_id<TAB>segment_key<TAB>raw_text` per line, tokenized on read.
std::vector<TokenizedDocument> read_text_records(const fs::path& path);

// `doc_id<TAB>segment_key<TAB>wordid:count ...`. Repeated ids are allowed
// and expand in order, so a run-length encoding round-trips token order.
// Ids >= vocab_size are dropped and counted in Document::oov_tokens.
std::vector<Document> read_bow(const fs::path& path, std::size_t vocab_size);
void write_bow(const fs::path& path, std::span<const Document> documents);

// Topic file: `topic_index<TAB>wordid:prob ...` with 9 decimals, every
// word id of the row listed. Rows sharing a topic index are allowed.
struct IndexedRow {
  std::size_t index = 0;
  Vector values;
};
void write_topics(const fs::path& path, std::span<const Vector> topics);
std::vector<IndexedRow> read_topics(const fs::path& path);

// Raw-count variants: `index<TAB>id:count ...`, non-zero counts only.
void write_topic_counts(const fs::path& path, const TopicCounts& counts);
void write_doc_counts(const fs::path& path, std::span<const std::string> doc_ids,
                      const TopicCounts& counts);
// Rebuilds counts from both files; `vocab_size` and `num_topics` fix the
// dimensions since zero counts are not written.
TopicCounts read_counts(const fs::path& topic_counts, const fs::path& doc_counts,
                        std::size_t vocab_size, std::size_t num_topics,
                        std::vector<std::string>* doc_ids);

// Mixtures: `doc_id<TAB>topic:prob ...` with 9 decimals.
void write_mixtures(const fs::path& path, std::span<const std::string> doc_ids,
                    std::span<const Vector> mixtures);

// Merged matrix: header `rows W`, then
// `segment_key<TAB>local_index<TAB>v0 v1 ...` (shortest round-trip decimals).
void write_merged(const fs::path& path, const TopicMatrix& matrix);
TopicMatrix read_merged(const fs::path& path);

// `segment_key<TAB>local_index` per discarded row.
void write_discarded(const fs::path& path, std::span<const Provenance> discarded);
std::vector<Provenance> read_discarded(const fs::path& path);

// `segment_key<TAB>local_index<TAB>cluster_id`.
void write_assignments(const fs::path& path, const TopicMatrix& matrix,
                       const Clustering& clustering);
std::vector<std::size_t> read_assignments(const fs::path& path, const TopicMatrix& matrix);

// `segment,topic_0,...,topic_{K-1}`.
void write_proportions_csv(const fs::path& path, const DynamicsReport& report);

// `segment,local_index,fraction,top_words` for one global topic.
void write_composition_csv(const fs::path& path, const DynamicsReport& report,
                           std::size_t global_topic, const Vocabulary& vocabulary);

// `topic,birth,death,absent_segments`.
void write_lifetimes_csv(const fs::path& path, const DynamicsReport& report);

// `rank,idA,idB,jaccard,dice`.
void write_match_table(std::ostream& out, const MatchReport& report);

// Fixed-precision and round-trip number formatting used by every writer.
std::string format_fixed(double value, int decimals);
std::string format_exact(double value);

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const fs::path& path);

}  // namespace clda::io
