#pragma once

#include <stdexcept>
#include <string>

namespace widecnn {

enum class ErrorKind {
  Structural,
  UnsupportedLayer,
  NumericOverflow,
  Numeric,
  Precondition,
  Assumption,
  Width,
  Range,
  IllConditioned,
  ConstructionFailed,
  Format,
  TrainingDiverged,
  Config,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Structural: return "structural error";
    case ErrorKind::UnsupportedLayer: return "unsupported layer";
    case ErrorKind::NumericOverflow: return "numeric overflow";
    case ErrorKind::Numeric: return "numeric error";
    case ErrorKind::Precondition: return "precondition violated";
    case ErrorKind::Assumption: return "assumption violated";
    case ErrorKind::Width: return "width error";
    case ErrorKind::Range: return "range error";
    case ErrorKind::IllConditioned: return "ill-conditioned";
    case ErrorKind::ConstructionFailed: return "construction failed";
    case ErrorKind::Format: return "format error";
    case ErrorKind::TrainingDiverged: return "training diverged";
    case ErrorKind::Config: return "config error";
  }
  return "error";
}

}  // namespace widecnn
