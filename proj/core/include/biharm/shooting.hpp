#pragma once

// Threshold search over the initial Laplacian beta = Δu(0): below the
// threshold u collapses at a finite radius, at and above it the solution is
// global and Δu tends to a non-negative limit which vanishes exactly at the
// threshold.

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "biharm/radial_ode.hpp"

namespace biharm {

struct ClassifyOptions {
  Controls integration{};
  double horizon = 1e5;  ///< r_stop used for classification
};

/// Only Global counts as the global side. Undetermined outcomes (negative limit
/// estimate, or a certified collapse beyond the extended horizon) fall on the
/// blow-down side.
[[nodiscard]] bool global_side(const SolutionClass& c) noexcept;

struct Classification {
  SolutionClass cls;
  Trajectory trajectory;  ///< the run that produced `cls`
  bool flagged = false;   ///< still undetermined after the doubled-horizon retry
};

/// Integrates to the classification horizon; an undetermined outcome is
/// retried once at twice the horizon. If it is still undetermined the result
/// is flagged and counts as blow-down for bracketing.
[[nodiscard]] Classification classify_beta_run(double q, double beta, const ClassifyOptions& opts = {});
[[nodiscard]] SolutionClass classify_beta(double q, double beta, const ClassifyOptions& opts = {});

struct Bracket {
  double lo = 0.0;  ///< blow-down side
  double hi = 0.0;  ///< global side
};

struct ShootingResult {
  double q = 0.0;
  double beta_lo = 0.0;
  double beta_hi = 0.0;
  double beta_star = 0.0;
  double gamma_at_bracket = 0.0;  ///< estimated limit of Δu at beta_hi
  int iterations = 0;             ///< bisection steps
  int classifications = 0;        ///< integrator runs after bracketing
  bool lo_flagged = false;        ///< beta_lo was an undetermined run counted as blow-down
  int flagged_runs = 0;
  std::optional<Trajectory> lo_trajectory;
  std::optional<Trajectory> hi_trajectory;
};

struct ShootingOptions {
  ClassifyOptions classify{};
  int max_iterations = 200;
  bool keep_trajectories = false;
};

/// Geometric scan beta = 2^k, k = -20..20, for the first blow-down -> global
/// transition. Throws NoBracket if the classification never changes.
[[nodiscard]] Bracket auto_bracket(double q, const ClassifyOptions& opts = {});

/// Bisection on the classifier until beta_hi - beta_lo <= tol. Without a
/// bracket, auto_bracket() supplies one. Throws NoBracket when the given
/// endpoints do not straddle the threshold and MaxIterations on runaway loops.
[[nodiscard]] ShootingResult find_beta_star(double q, std::optional<Bracket> bracket, double tol,
                                            const ShootingOptions& opts = {});

struct GammaEstimate {
  double raw = 0.0;          ///< v(r_stop)
  double moment_term = 0.0;  ///< I2(r_stop)/r_stop, removed exactly
  double tail = 0.0;         ///< modeled ∫_R^∞ t u^{-q} dt
  double corrected = 0.0;    ///< raw - moment_term - tail
  double r_stop = 0.0;
  std::string model;
};

/// Throws NotGlobal unless the trajectory is classified Global.
[[nodiscard]] GammaEstimate gamma_limit(const Trajectory& traj);

/// Same estimate without the classification precondition.
[[nodiscard]] GammaEstimate gamma_estimate(const Trajectory& traj);

struct CacheEntry {
  double beta_lo = 0.0;
  double beta_hi = 0.0;
  double tol = 0.0;
  double horizon = 0.0;
  std::string timestamp;

  [[nodiscard]] double beta_star() const noexcept { return 0.5 * (beta_lo + beta_hi); }
};

/// Shortest decimal string that round-trips q; the cache key.
[[nodiscard]] std::string canonical_q(double q);

/// On-disk JSON map  canonical q -> {beta_lo, beta_hi, tol, horizon, timestamp}.
class BetaStarCache {
 public:
  explicit BetaStarCache(std::filesystem::path path);

  /// Entry for q usable at the requested tolerance and horizon (stored
  /// tol <= requested tol, same horizon).
  [[nodiscard]] std::optional<CacheEntry> lookup(double q, double tol, double horizon) const;
  void store(double q, const CacheEntry& entry);
  /// Writes to a temporary sibling and renames it over the target.
  void save() const;

  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::filesystem::path path_;
  std::map<std::string, CacheEntry> entries_;
};

struct ResolvedThreshold {
  CacheEntry entry;
  bool cache_hit = false;
  std::optional<ShootingResult> computed;  ///< set on a miss
};

/// Cache lookup, falling back to find_beta_star() and storing the result.
[[nodiscard]] ResolvedThreshold resolve_beta_star(double q, double tol, BetaStarCache* cache,
                                                  const ShootingOptions& opts = {});

}  // namespace biharm
