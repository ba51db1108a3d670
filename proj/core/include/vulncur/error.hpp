#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vulncur {

enum class Errc {
  // ingest
  MalformedLine,
  SchemaViolation,
  DuplicateRecordId,
  MalformedEntry,
  DuplicateCve,
  ConflictingCve,
  // dedup
  MissingVersion,
  // splitting
  EmptyCorpus,
  DegenerateSplit,
  InvalidFractions,
  // evaluation
  MissingPrediction,
  UnknownRecord,
  DuplicatePrediction,
  EmptyEvaluation,
  NoVulnerableSamples,
  NoBenignSamples,
  InvalidArgument,
  // audit
  InsufficientPopulation,
  DuplicateVote,
  UnknownSample,
  UnknownVote,
  UnresolvedSamples,
  PortInUse,
  // environment
  Io,
};

std::string_view to_string(Errc code);

/// Every failure the library reports. `line` is 1-based when the error is tied
/// to a line of an input file; `subject` names the offending field, id or path.
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string subject, std::optional<std::size_t> line = std::nullopt,
        std::string detail = {});

  Errc code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

  /// Environment failures (files, sockets) as opposed to bad input.
  bool is_io() const noexcept { return code_ == Errc::Io || code_ == Errc::PortInUse; }

  /// Returns a copy whose message is prefixed with `file`.
  Error with_file(std::string_view file) const;

 private:
  Error(Errc code, std::string subject, std::optional<std::size_t> line, std::string detail,
        std::string message);

  Errc code_;
  std::string subject_;
  std::optional<std::size_t> line_;
  std::string detail_;
};

}  // namespace vulncur
