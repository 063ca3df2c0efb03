#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace biharm {

enum class Errc {
  InvalidParams,
  NonPositiveU,
  ZeroRadius,
  SeedTooLarge,
  StepUnderflow,
  ToleranceUnreachable,
  SampleNotFound,
  NotGlobal,
  NoBracket,
  MaxIterations,
  DegenerateState,
  NoConvergence,
  PoorFit,
  KappaZero,
  OutOfRegime,
  NotConverged,
  DegenerateScaling,
  BelowThreshold,
  OutOfRange,
  GridTooCoarse,
  Io,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so that
/// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace biharm
