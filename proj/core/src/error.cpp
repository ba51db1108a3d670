#include "vulncur/error.hpp"

namespace vulncur {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::MalformedLine: return "MalformedLine";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::DuplicateRecordId: return "DuplicateRecordId";
    case Errc::MalformedEntry: return "MalformedEntry";
    case Errc::DuplicateCve: return "DuplicateCve";
    case Errc::ConflictingCve: return "ConflictingCve";
    case Errc::MissingVersion: return "MissingVersion";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::DegenerateSplit: return "DegenerateSplit";
    case Errc::InvalidFractions: return "InvalidFractions";
    case Errc::MissingPrediction: return "MissingPrediction";
    case Errc::UnknownRecord: return "UnknownRecord";
    case Errc::DuplicatePrediction: return "DuplicatePrediction";
    case Errc::EmptyEvaluation: return "EmptyEvaluation";
    case Errc::NoVulnerableSamples: return "NoVulnerableSamples";
    case Errc::NoBenignSamples: return "NoBenignSamples";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InsufficientPopulation: return "InsufficientPopulation";
    case Errc::DuplicateVote: return "DuplicateVote";
    case Errc::UnknownSample: return "UnknownSample";
    case Errc::UnknownVote: return "UnknownVote";
    case Errc::UnresolvedSamples: return "UnresolvedSamples";
    case Errc::PortInUse: return "PortInUse";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

namespace {

std::string format_message(Errc code, const std::string& subject,
                           std::optional<std::size_t> line, const std::string& detail) {
  std::string msg;
  if (line) msg += "line " + std::to_string(*line) + ": ";
  msg += to_string(code);
  if (!subject.empty()) msg += "(" + subject + ")";
  if (!detail.empty()) msg += ": " + detail;
  return msg;
}

}  // namespace

Error::Error(Errc code, std::string subject, std::optional<std::size_t> line, std::string detail)
    : Error(code, subject, line, detail, format_message(code, subject, line, detail)) {}

Error::Error(Errc code, std::string subject, std::optional<std::size_t> line, std::string detail,
             std::string message)
    : std::runtime_error(std::move(message)),
      code_(code),
      subject_(std::move(subject)),
      line_(line),
      detail_(std::move(detail)) {}

Error Error::with_file(std::string_view file) const {
  return Error(code_, subject_, line_, detail_, std::string(file) + ": " + what());
}

}  // namespace vulncur
