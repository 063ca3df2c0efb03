#pragma once

// CSV and JSON encodings of the library's results. Doubles are written with 17
// significant digits so that parsing them back is bit-exact.

#include <filesystem>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "biharm/asymptotics.hpp"
#include "biharm/phase_space.hpp"
#include "biharm/radial_ode.hpp"
#include "biharm/shooting.hpp"

namespace biharm {

inline constexpr const char* kTrajectoryCsvHeader = "r,u,du,v,dv,I1,I2,I3,I4,J1,J2";
inline constexpr const char* kPhaseCsvHeader = "t,x,y,z,w";

/// "%.17g".
[[nodiscard]] std::string format_double(double x);

void write_trajectory_csv(std::ostream& out, const std::vector<RadialState>& samples);
void write_phase_csv(std::ostream& out, const PhasePath& path);

/// Parses a trajectory CSV written by write_trajectory_csv. Throws Io on a
/// header mismatch or malformed row.
[[nodiscard]] std::vector<RadialState> read_trajectory_csv(std::istream& in);

/// Writes `content` to a temporary sibling of `path` and renames it into place.
void atomic_write(const std::filesystem::path& path, const std::string& content);

/// Array of {name, point, eigenvalues: [[re, im], ...]}.
[[nodiscard]] nlohmann::json fixed_point_report(double q);

void to_json(nlohmann::json& j, const ProblemParams& p);
void to_json(nlohmann::json& j, const Controls& c);
void to_json(nlohmann::json& j, const StepStats& s);
void to_json(nlohmann::json& j, const SolutionClass& c);
void to_json(nlohmann::json& j, const GammaEstimate& g);
void to_json(nlohmann::json& j, const ShootingResult& r);
void to_json(nlohmann::json& j, const CacheEntry& e);
void to_json(nlohmann::json& j, const KappaEstimate& k);
void to_json(nlohmann::json& j, const SecondOrderResult& s);
void to_json(nlohmann::json& j, const RateFit& f);
void to_json(nlohmann::json& j, const ScalingMap& m);
void to_json(nlohmann::json& j, const PairConstruction& p);
void to_json(nlohmann::json& j, const WitnessReport& w);
void to_json(nlohmann::json& j, const ConsistencyCheck& c);
void to_json(nlohmann::json& j, const AsymptoticsReport& r);
void to_json(nlohmann::json& j, const LinearizationReport& r);

void from_json(const nlohmann::json& j, ProblemParams& p);

}  // namespace biharm
