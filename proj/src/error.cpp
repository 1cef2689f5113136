#include "degenlap/error.hpp"

namespace degenlap {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::InvalidExponents: return "InvalidExponents";
    case ErrorCode::OutOfCollar: return "OutOfCollar";
    case ErrorCode::EnvelopeViolated: return "EnvelopeViolated";
    case ErrorCode::Divergent: return "Divergent";
    case ErrorCode::NaNEncountered: return "NaNEncountered";
    case ErrorCode::DegenerateJacobian: return "DegenerateJacobian";
    case ErrorCode::OutsideDomain: return "OutsideDomain";
    case ErrorCode::BracketFailure: return "BracketFailure";
    case ErrorCode::QuadratureError: return "QuadratureError";
    case ErrorCode::UnsupportedGeometry: return "UnsupportedGeometry";
    case ErrorCode::MarginTooSmall: return "MarginTooSmall";
    case ErrorCode::SublinearityUnverifiable: return "SublinearityUnverifiable";
    case ErrorCode::BelowLambdaHat1: return "BelowLambdaHat1";
    case ErrorCode::BelowLambdaStar: return "BelowLambdaStar";
    case ErrorCode::GeometryInadmissible: return "GeometryInadmissible";
    case ErrorCode::EnvelopeFailure: return "EnvelopeFailure";
    case ErrorCode::OrderingFailure: return "OrderingFailure";
    case ErrorCode::UnorderedPair: return "UnorderedPair";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SandwichViolated: return "SandwichViolated";
    case ErrorCode::MonotonicityViolated: return "MonotonicityViolated";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace degenlap
