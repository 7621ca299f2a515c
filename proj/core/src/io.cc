#include "clda/io.h"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "clda/errors.h"

namespace clda::io {

namespace {

std::ifstream open_in(const fs::path& path) {
  if (!fs::exists(path)) throw MissingArtifactError(path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(line.substr(start));
      return parts;
    }
    parts.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

// Whitespace-separated fields, empty ones skipped.
std::vector<std::string_view> fields(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < text.size() && text[i] != ' ' && text[i] != '\t') ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

template <class T>
T parse(std::string_view text, const fs::path& path, std::size_t line_no) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(path.string() + ":" + std::to_string(line_no) + ": cannot parse '" +
                     std::string(text) + "'");
  }
  return value;
}

// Splits `id:value`.
template <class T>
std::pair<std::size_t, T> parse_pair(std::string_view item, const fs::path& path,
                                     std::size_t line_no) {
  const auto colon = item.find(':');
  if (colon == std::string_view::npos) {
    throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected id:value, got '" +
                     std::string(item) + "'");
  }
  return {parse<std::size_t>(item.substr(0, colon), path, line_no),
          parse<T>(item.substr(colon + 1), path, line_no)};
}

void check_key(const std::string& key) {
  if (key.find_first_of("\t\n") != std::string::npos) {
    throw CorruptionError("segment key contains a tab or newline: '" + key + "'");
  }
}

}  // namespace

std::string format_fixed(double value, int decimals) {
  std::array<char, 64> buf{};
  const int n = std::snprintf(buf.data(), buf.size(), "%.*f", decimals, value);
  return std::string(buf.data(), static_cast<std::size_t>(n));
}

std::string format_exact(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::vector<std::string> read_lines(const fs::path& path) {
  auto in = open_in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    lines.push_back(line);
  }
  return lines;
}

void write_lines(const fs::path& path, std::span<const std::string> lines) {
  auto out = open_out(path);
  for (const auto& line : lines) out << line << '\n';
}

Vocabulary read_vocabulary(const fs::path& path) { return Vocabulary(read_lines(path)); }

void write_vocabulary(const fs::path& path, const Vocabulary& vocabulary) {
  write_lines(path, vocabulary.words());
}

std::vector<TokenizedDocument> read_text_records(const fs::path& path) {
  auto in = open_in(path);
  std::vector<TokenizedDocument> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto first = line.find('\t');
    const auto second = first == std::string::npos ? first : line.find('\t', first + 1);
    if (second == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected doc_id<TAB>segment_key<TAB>text");
    }
    docs.push_back({line.substr(0, first), line.substr(first + 1, second - first - 1),
                    tokenize(std::string_view(line).substr(second + 1))});
  }
  return docs;
}

std::vector<Document> read_bow(const fs::path& path, std::size_t vocab_size) {
  auto in = open_in(path);
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto parts = split(line, '\t');
    if (parts.size() < 2 || parts.size() > 3) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected doc_id<TAB>segment_key<TAB>wordid:count ...");
    }
    Document doc{std::string(parts[0]), std::string(parts[1]), {}, 0};
    if (parts.size() == 3) {
      for (auto item : fields(parts[2])) {
        auto [id, count] = parse_pair<std::size_t>(item, path, line_no);
        if (id >= vocab_size) {
          doc.oov_tokens += count;
          continue;
        }
        doc.tokens.insert(doc.tokens.end(), count, static_cast<WordId>(id));
      }
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

void write_bow(const fs::path& path, std::span<const Document> documents) {
  auto out = open_out(path);
  for (const auto& doc : documents) {
    check_key(doc.segment_key);
    out << doc.doc_id << '\t' << doc.segment_key << '\t';
    std::size_t i = 0;
    bool first = true;
    while (i < doc.tokens.size()) {
      std::size_t run = 1;
      while (i + run < doc.tokens.size() && doc.tokens[i + run] == doc.tokens[i]) ++run;
      if (!first) out << ' ';
      out << doc.tokens[i] << ':' << run;
      first = false;
      i += run;
    }
    out << '\n';
  }
}

void write_topics(const fs::path& path, std::span<const Vector> topics) {
  auto out = open_out(path);
  for (std::size_t k = 0; k < topics.size(); ++k) {
    out << k << '\t';
    for (std::size_t w = 0; w < topics[k].size(); ++w) {
      if (w > 0) out << ' ';
      out << w << ':' << format_fixed(topics[k][w], 9);
    }
    out << '\n';
  }
}

std::vector<IndexedRow> read_topics(const fs::path& path) {
  auto in = open_in(path);
  std::vector<IndexedRow> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected topic_index<TAB>wordid:prob ...");
    }
    IndexedRow row;
    row.index = parse<std::size_t>(std::string_view(line).substr(0, tab), path, line_no);
    for (auto item : fields(std::string_view(line).substr(tab + 1))) {
      auto [id, value] = parse_pair<double>(item, path, line_no);
      if (id >= row.values.size()) row.values.resize(id + 1, 0.0);
      row.values[id] = value;
    }
    dim = std::max(dim, row.values.size());
    rows.push_back(std::move(row));
  }
  for (auto& row : rows) row.values.resize(dim, 0.0);
  return rows;
}

void write_topic_counts(const fs::path& path, const TopicCounts& counts) {
  auto out = open_out(path);
  for (std::size_t k = 0; k < counts.num_topics; ++k) {
    out << k << '\t';
    bool first = true;
    for (std::size_t w = 0; w < counts.vocab_size; ++w) {
      const auto c = counts.topic_word(k, static_cast<WordId>(w));
      if (c == 0) continue;
      if (!first) out << ' ';
      out << w << ':' << c;
      first = false;
    }
    out << '\n';
  }
}

void write_doc_counts(const fs::path& path, std::span<const std::string> doc_ids,
                      const TopicCounts& counts) {
  auto out = open_out(path);
  for (std::size_t j = 0; j < counts.num_docs(); ++j) {
    out << doc_ids[j] << '\t';
    bool first = true;
    for (std::size_t k = 0; k < counts.num_topics; ++k) {
      const auto c = counts.doc_topic_count(j, k);
      if (c == 0) continue;
      if (!first) out << ' ';
      out << k << ':' << c;
      first = false;
    }
    out << '\n';
  }
}

TopicCounts read_counts(const fs::path& topic_counts, const fs::path& doc_counts,
                        std::size_t vocab_size, std::size_t num_topics,
                        std::vector<std::string>* doc_ids) {
  TopicCounts counts;
  counts.num_topics = num_topics;
  counts.vocab_size = vocab_size;
  counts.word_topic.assign(vocab_size * num_topics, 0);
  counts.topic_totals.assign(num_topics, 0);

  std::size_t line_no = 0;
  for (const auto& line : read_lines(topic_counts)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(topic_counts.string() + ": malformed line");
    const auto k = parse<std::size_t>(std::string_view(line).substr(0, tab), topic_counts, line_no);
    if (k >= num_topics) throw CorruptionError(topic_counts.string() + ": topic index out of range");
    for (auto item : fields(std::string_view(line).substr(tab + 1))) {
      auto [w, c] = parse_pair<std::int64_t>(item, topic_counts, line_no);
      if (w >= vocab_size) throw CorruptionError(topic_counts.string() + ": word id out of range");
      counts.word_topic[w * num_topics + k] += c;
      counts.topic_totals[k] += c;
    }
  }

  line_no = 0;
  for (const auto& line : read_lines(doc_counts)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(doc_counts.string() + ": malformed line");
    if (doc_ids) doc_ids->push_back(line.substr(0, tab));
    const std::size_t j = counts.doc_lengths.size();
    counts.doc_lengths.push_back(0);
    counts.doc_topic.resize((j + 1) * num_topics, 0);
    for (auto item : fields(std::string_view(line).substr(tab + 1))) {
      auto [k, c] = parse_pair<std::int64_t>(item, doc_counts, line_no);
      if (k >= num_topics) throw CorruptionError(doc_counts.string() + ": topic index out of range");
      counts.doc_topic[j * num_topics + k] += c;
      counts.doc_lengths[j] += c;
    }
  }
  return counts;
}

void write_mixtures(const fs::path& path, std::span<const std::string> doc_ids,
                    std::span<const Vector> mixtures) {
  auto out = open_out(path);
  for (std::size_t j = 0; j < mixtures.size(); ++j) {
    out << doc_ids[j] << '\t';
    for (std::size_t k = 0; k < mixtures[j].size(); ++k) {
      if (k > 0) out << ' ';
      out << k << ':' << format_fixed(mixtures[j][k], 9);
    }
    out << '\n';
  }
}

void write_merged(const fs::path& path, const TopicMatrix& matrix) {
  auto out = open_out(path);
  out << matrix.size() << ' ' << matrix.dim << '\n';
  for (std::size_t r = 0; r < matrix.size(); ++r) {
    check_key(matrix.provenance[r].segment_key);
    out << matrix.provenance[r].segment_key << '\t' << matrix.provenance[r].local_index << '\t';
    for (std::size_t w = 0; w < matrix.rows[r].size(); ++w) {
      if (w > 0) out << ' ';
      out << format_exact(matrix.rows[r][w]);
    }
    out << '\n';
  }
}

TopicMatrix read_merged(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw ParseError(path.string() + ": missing header");
  const auto header = fields(lines[0]);
  if (header.size() != 2) throw ParseError(path.string() + ": header must be 'rows W'");
  const auto n_rows = parse<std::size_t>(header[0], path, 1);
  TopicMatrix matrix;
  matrix.dim = parse<std::size_t>(header[1], path, 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto parts = split(lines[i], '\t');
    if (parts.size() != 3) throw ParseError(path.string() + ":" + std::to_string(i + 1) + ": malformed row");
    Vector row;
    row.reserve(matrix.dim);
    for (auto v : fields(parts[2])) row.push_back(parse<double>(v, path, i + 1));
    if (row.size() != matrix.dim) {
      throw CorruptionError(path.string() + ":" + std::to_string(i + 1) + ": row has " +
                            std::to_string(row.size()) + " entries, expected " +
                            std::to_string(matrix.dim));
    }
    matrix.provenance.push_back({std::string(parts[0]), parse<std::size_t>(parts[1], path, i + 1)});
    matrix.rows.push_back(std::move(row));
  }
  if (matrix.size() != n_rows) {
    throw CorruptionError(path.string() + ": header promises " + std::to_string(n_rows) +
                          " rows, found " + std::to_string(matrix.size()));
  }
  return matrix;
}

void write_discarded(const fs::path& path, std::span<const Provenance> discarded) {
  auto out = open_out(path);
  for (const auto& p : discarded) out << p.segment_key << '\t' << p.local_index << '\n';
}

std::vector<Provenance> read_discarded(const fs::path& path) {
  std::vector<Provenance> discarded;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (line.empty()) continue;
    const auto parts = split(line, '\t');
    if (parts.size() != 2) throw ParseError(path.string() + ": malformed line");
    discarded.push_back({std::string(parts[0]), parse<std::size_t>(parts[1], path, line_no)});
  }
  return discarded;
}

void write_assignments(const fs::path& path, const TopicMatrix& matrix,
                       const Clustering& clustering) {
  auto out = open_out(path);
  for (std::size_t r = 0; r < matrix.size(); ++r) {
    out << matrix.provenance[r].segment_key << '\t' << matrix.provenance[r].local_index << '\t'
        << clustering.assignment[r] << '\n';
  }
}

std::vector<std::size_t> read_assignments(const fs::path& path, const TopicMatrix& matrix) {
  std::vector<std::size_t> assignment;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (line.empty()) continue;
    const auto parts = split(line, '\t');
    if (parts.size() != 3) throw ParseError(path.string() + ": malformed line");
    const std::size_t r = assignment.size();
    if (r >= matrix.size() || parts[0] != matrix.provenance[r].segment_key ||
        parse<std::size_t>(parts[1], path, line_no) != matrix.provenance[r].local_index) {
      throw CorruptionError(path.string() + ":" + std::to_string(line_no) +
                            ": assignment does not match the merged matrix");
    }
    assignment.push_back(parse<std::size_t>(parts[2], path, line_no));
  }
  if (assignment.size() != matrix.size()) {
    throw CorruptionError(path.string() + ": expected " + std::to_string(matrix.size()) +
                          " assignments");
  }
  return assignment;
}

void write_proportions_csv(const fs::path& path, const DynamicsReport& report) {
  auto out = open_out(path);
  const std::size_t K = report.proportions.empty() ? 0 : report.proportions.front().size();
  out << "segment";
  for (std::size_t g = 0; g < K; ++g) out << ",topic_" << g;
  out << '\n';
  for (std::size_t s = 0; s < report.segments.size(); ++s) {
    out << report.segments[s];
    for (double p : report.proportions[s]) out << ',' << format_fixed(p, 9);
    out << '\n';
  }
}

void write_composition_csv(const fs::path& path, const DynamicsReport& report,
                           std::size_t global_topic, const Vocabulary& vocabulary) {
  auto out = open_out(path);
  out << "segment,local_index,fraction,top_words\n";
  for (std::size_t s = 0; s < report.segments.size(); ++s) {
    for (const auto& entry : report.compositions[s][global_topic]) {
      out << report.segments[s] << ',' << entry.local_index << ','
          << format_fixed(entry.fraction, 9) << ',';
      for (std::size_t i = 0; i < entry.ranked_words.size(); ++i) {
        if (i > 0) out << ';';
        out << vocabulary.word(entry.ranked_words[i]);
      }
      out << '\n';
    }
  }
}

void write_lifetimes_csv(const fs::path& path, const DynamicsReport& report) {
  auto out = open_out(path);
  out << "topic,birth,death,absent_segments\n";
  for (std::size_t g = 0; g < report.lifetimes.size(); ++g) {
    const auto& life = report.lifetimes[g];
    out << g << ',' << (life.birth ? report.segments[*life.birth] : "") << ','
        << (life.death ? report.segments[*life.death] : "") << ',';
    for (std::size_t i = 0; i < life.absent_segments.size(); ++i) {
      if (i > 0) out << ';';
      out << report.segments[life.absent_segments[i]];
    }
    out << '\n';
  }
}

void write_match_table(std::ostream& out, const MatchReport& report) {
  out << "rank,idA,idB,jaccard,dice\n";
  for (std::size_t i = 0; i < report.pairs.size(); ++i) {
    const auto& p = report.pairs[i];
    out << (i + 1) << ',' << p.a << ',' << p.b << ',' << format_fixed(p.jaccard, 6) << ','
        << format_fixed(p.dice, 6) << '\n';
  }
}

std::string sha256_file(const fs::path& path) {
  auto in = open_in(path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error("cannot initialize SHA-256");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

}  // namespace clda::io
