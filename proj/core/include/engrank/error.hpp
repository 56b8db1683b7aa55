#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace engrank {

enum class ErrorKind {
  kMissingProfile,
  kSchemaViolation,
  kEmptyDataset,
  kTooFewUsers,
  kInvalidConfig,
  kNonFiniteFeature,
  kDiverged,
  kSingularSystem,
  kSchemaMismatch,
  kNoUsefulWeakRanker,
  kIdSetMismatch,
  kEmptyRankerSet,
  kDegenerateLabels,
  kMissingLabel,
  kDegenerateDifferences,
  kIo,
};

std::string_view error_kind_name(ErrorKind kind);

// Every library failure is reported through this type. `details` carries
// the structured payload (line number, field, user id, ...) that the CLI
// forwards verbatim in its error JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        nlohmann::json details = nlohmann::json::object())
      : std::runtime_error(message), kind_(kind), details_(std::move(details)) {}

  ErrorKind kind() const { return kind_; }
  const nlohmann::json& details() const { return details_; }

  nlohmann::json to_json() const {
    return {{"error", std::string(error_kind_name(kind_))},
            {"message", what()},
            {"details", details_}};
  }

 private:
  ErrorKind kind_;
  nlohmann::json details_;
};

inline std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMissingProfile: return "MissingProfile";
    case ErrorKind::kSchemaViolation: return "SchemaViolation";
    case ErrorKind::kEmptyDataset: return "EmptyDataset";
    case ErrorKind::kTooFewUsers: return "TooFewUsers";
    case ErrorKind::kInvalidConfig: return "InvalidConfig";
    case ErrorKind::kNonFiniteFeature: return "NonFiniteFeature";
    case ErrorKind::kDiverged: return "Diverged";
    case ErrorKind::kSingularSystem: return "SingularSystem";
    case ErrorKind::kSchemaMismatch: return "SchemaMismatch";
    case ErrorKind::kNoUsefulWeakRanker: return "NoUsefulWeakRanker";
    case ErrorKind::kIdSetMismatch: return "IdSetMismatch";
    case ErrorKind::kEmptyRankerSet: return "EmptyRankerSet";
    case ErrorKind::kDegenerateLabels: return "DegenerateLabels";
    case ErrorKind::kMissingLabel: return "MissingLabel";
    case ErrorKind::kDegenerateDifferences: return "DegenerateDifferences";
    case ErrorKind::kIo: return "IoError";
  }
  return "Unknown";
}

}  // namespace engrank
