#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace steerkit {

enum class ErrorCode {
  NotHermitian,
  TraceNotOne,
  NotPositive,
  UnknownFamily,
  ParamOutOfDomain,
  SteeredStateSingular,
  UnphysicalAssemblage,
  DomainError,
  NonFiniteObjective,
  DegenerateWeight,
  NotXState,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::TraceNotOne: return "TraceNotOne";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::UnknownFamily: return "UnknownFamily";
    case ErrorCode::ParamOutOfDomain: return "ParamOutOfDomain";
    case ErrorCode::SteeredStateSingular: return "SteeredStateSingular";
    case ErrorCode::UnphysicalAssemblage: return "UnphysicalAssemblage";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NonFiniteObjective: return "NonFiniteObjective";
    case ErrorCode::DegenerateWeight: return "DegenerateWeight";
    case ErrorCode::NotXState: return "NotXState";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure in the library is reported through this type. `magnitude`
/// carries the offending quantity when there is one (e.g. the smallest
/// eigenvalue for NotPositive), otherwise 0.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, double magnitude = 0.0)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        magnitude_(magnitude) {}

  ErrorCode code() const noexcept { return code_; }
  double magnitude() const noexcept { return magnitude_; }

 private:
  ErrorCode code_;
  double magnitude_;
};

}  // namespace steerkit
