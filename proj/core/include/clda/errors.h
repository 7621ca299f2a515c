#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace clda {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user-supplied parameters (K out of range, bad priors, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Mathematical precondition violated, e.g. cosine distance of a zero vector.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Data that contradicts its own structure, e.g. a word id beyond the vocabulary.
class CorruptionError : public Error {
 public:
  using Error::Error;
};

class EmptyVocabularyError : public Error {
 public:
  EmptyVocabularyError()
      : Error("empty vocabulary: every word was removed by the filters") {}
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ZeroProbabilityError : public Error {
 public:
  ZeroProbabilityError(std::size_t doc, std::size_t token)
      : Error("zero probability for token " + std::to_string(token) +
              " of document " + std::to_string(doc) +
              " (are the topics smoothed?)"),
        doc_(doc),
        token_(token) {}

  std::size_t doc() const { return doc_; }
  std::size_t token() const { return token_; }

 private:
  std::size_t doc_;
  std::size_t token_;
};

class MissingArtifactError : public Error {
 public:
  explicit MissingArtifactError(const std::string& path)
      : Error("missing artifact: " + path), path_(path) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Wraps any failure inside a pipeline stage with the stage's name.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage '" + stage + "' failed: " + what),
        stage_(std::move(stage)) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace clda
