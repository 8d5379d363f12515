#pragma once

#include <stdexcept>
#include <string>

namespace rda {

// Failure categories surfaced by the library. Everything derives from
// std::runtime_error so callers can catch coarsely; the code narrows the
// cause for programmatic handling.
enum class ErrorCode {
  InvalidArgument,
  ConfigError,
  IoError,
  NoRootFound,
  WrongSide,
  MixedSides,
  BoundsOutOfDomain,
  OutOfDomain,
  SingularSystem,
  NoSignChange,
  NoPeriodicConvergence,
  NewtonDivergence,
  LayerUnresolved,
  LayerCoversDomain,
  ZeroDenominator,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace rda
