#pragma once

#include <stdexcept>
#include <string>

namespace cistab {

enum class ErrorKind {
  NonPositiveBeta,
  NonPositiveLambda,
  BadGeometry,
  NoRootInBracket,
  ConvergenceFailure,
  NegativeDiscriminant,
  HypothesisFailed,
  EmptyFeasibleSet,
  RootCountShortfall,
  NonFiniteState,
  ZeroInitialState,
  UsageError,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it onto an exit code without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cistab
