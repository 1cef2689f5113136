#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace degenlap {

enum class ErrorCode {
  NonPositiveWeight,
  InvalidExponents,
  OutOfCollar,
  EnvelopeViolated,
  Divergent,
  NaNEncountered,
  DegenerateJacobian,
  OutsideDomain,
  BracketFailure,
  QuadratureError,
  UnsupportedGeometry,
  MarginTooSmall,
  SublinearityUnverifiable,
  BelowLambdaHat1,
  BelowLambdaStar,
  GeometryInadmissible,
  EnvelopeFailure,
  OrderingFailure,
  UnorderedPair,
  NoConvergence,
  SandwichViolated,
  MonotonicityViolated,
  InvalidArgument,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

// Carries a machine-readable code next to the diagnostic; the CLI maps codes
// onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        detail_(what) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  /// The diagnostic without the code prefix.
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace degenlap
