#pragma once

// Quantitative checks of the library against closed forms and asymptotic
// predictions, grouped into named suites. A failing or throwing check is
// recorded, never propagated.

#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "biharm/radial_ode.hpp"

namespace biharm {

struct VerifyRecord {
  std::string suite;
  std::string check;
  double q = 0.0;
  nlohmann::json inputs = nlohmann::json::object();
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
  double seconds = 0.0;
};

struct VerifyConfig {
  std::vector<std::string> suites;  ///< empty: all suites
  std::vector<double> q_list;       ///< empty: each suite's default list
  std::optional<std::filesystem::path> cache;
  Controls controls{};
};

struct VerifyReport {
  std::vector<VerifyRecord> records;
  std::size_t passed = 0;
  std::size_t failed = 0;
  bool all_pass = false;
  std::string version;
  nlohmann::json config;
};

/// fixed-points, eigen, threshold, tracking, kappa-identity, gamma-probe,
/// second-order-linear, second-order-log, second-order-power, rates, scaling,
/// singular-power, representation (the last one audits every trajectory the
/// other selected suites produced).
[[nodiscard]] const std::vector<std::string>& suite_names();

/// Throws InvalidParams for an unknown suite name or a q outside (1, ∞).
[[nodiscard]] VerifyReport run_verify(const VerifyConfig& config);

void to_json(nlohmann::json& j, const VerifyRecord& r);
void to_json(nlohmann::json& j, const VerifyReport& r);

}  // namespace biharm
