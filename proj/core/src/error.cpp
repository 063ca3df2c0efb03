#include "biharm/error.hpp"

namespace biharm {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::NonPositiveU: return "NonPositiveU";
    case Errc::ZeroRadius: return "ZeroRadius";
    case Errc::SeedTooLarge: return "SeedTooLarge";
    case Errc::StepUnderflow: return "StepUnderflow";
    case Errc::ToleranceUnreachable: return "ToleranceUnreachable";
    case Errc::SampleNotFound: return "SampleNotFound";
    case Errc::NotGlobal: return "NotGlobal";
    case Errc::NoBracket: return "NoBracket";
    case Errc::MaxIterations: return "MaxIterations";
    case Errc::DegenerateState: return "DegenerateState";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::PoorFit: return "PoorFit";
    case Errc::KappaZero: return "KappaZero";
    case Errc::OutOfRegime: return "OutOfRegime";
    case Errc::NotConverged: return "NotConverged";
    case Errc::DegenerateScaling: return "DegenerateScaling";
    case Errc::BelowThreshold: return "BelowThreshold";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::GridTooCoarse: return "GridTooCoarse";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace biharm
