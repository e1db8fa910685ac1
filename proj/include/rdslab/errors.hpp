#pragma once

#include <stdexcept>
#include <string>

namespace rdslab {

enum class ErrorCode {
  NonStochastic,
  Reducible,
  StateSpaceTooLarge,
  NotMarkov,
  OutOfRange,
  ResolutionMismatch,
  UnknownSymbol,
  DegenerateDensity,
  NoConvergence,
  NotSummable,
  HorizonTooLarge,
  OrderTooLarge,
  OverlappingBlocks,
  ZeroVariance,
  TooFewHits,
  ConfigInvalid,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonStochastic: return "NonStochastic";
    case ErrorCode::Reducible: return "Reducible";
    case ErrorCode::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorCode::NotMarkov: return "NotMarkov";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ResolutionMismatch: return "ResolutionMismatch";
    case ErrorCode::UnknownSymbol: return "UnknownSymbol";
    case ErrorCode::DegenerateDensity: return "DegenerateDensity";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotSummable: return "NotSummable";
    case ErrorCode::HorizonTooLarge: return "HorizonTooLarge";
    case ErrorCode::OrderTooLarge: return "OrderTooLarge";
    case ErrorCode::OverlappingBlocks: return "OverlappingBlocks";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::TooFewHits: return "TooFewHits";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

/// Error with a stable machine-readable code plus a human message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rdslab
