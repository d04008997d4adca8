#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qthermo {

enum class ErrorCode {
  kNegativeRate,
  kNonFinite,
  kTooSmall,
  kInvalidDistribution,
  kIntegrationFailure,
  kNotIrreducible,
  kSolveFailure,
  kNotReversible,
  kNotDetailedBalanced,
  kDomainError,
  kSupportError,
  kGridTooCoarse,
  kParseError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kNegativeRate: return "NegativeRate";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kTooSmall: return "TooSmall";
    case ErrorCode::kInvalidDistribution: return "InvalidDistribution";
    case ErrorCode::kIntegrationFailure: return "IntegrationFailure";
    case ErrorCode::kNotIrreducible: return "NotIrreducible";
    case ErrorCode::kSolveFailure: return "SolveFailure";
    case ErrorCode::kNotReversible: return "NotReversible";
    case ErrorCode::kNotDetailedBalanced: return "NotDetailedBalanced";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kSupportError: return "SupportError";
    case ErrorCode::kGridTooCoarse: return "GridTooCoarse";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qthermo
