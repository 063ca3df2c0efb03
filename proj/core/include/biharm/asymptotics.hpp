#pragma once

// Growth constant κ = lim u/r² of global solutions, second-order behaviour of
// u - κr², decay rates toward the phase point p2 and the scaling that moves
// κ to any prescribed value.

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biharm/phase_space.hpp"
#include "biharm/radial_ode.hpp"

namespace biharm {

struct KappaEstimate {
  double value = 0.0;
  double error_bar = 0.0;  ///< spread between the full and the two-term fit, or the fit residual
  double raw = 0.0;        ///< u(R)/R² at the last sample
  double rate = 0.0;       ///< leading correction exponent p in κ + c r^{-p}
  std::size_t points = 0;
  std::string model;
};

struct GrowthFitOptions {
  double window_decades = 1.0;
  double max_error = std::numeric_limits<double>::infinity();  ///< PoorFit above this error bar
};

/// Least-squares fit of u/r² over the final window against κ + c r^{-p} + ...
/// with p = min(1, 2q-2) (log r / r terms at q = 3/2). Throws NotGlobal and
/// PoorFit.
[[nodiscard]] KappaEstimate kappa_from_growth(const Trajectory& traj, const GrowthFitOptions& opts = {});

/// The same fit on bare samples (no classification precondition).
[[nodiscard]] KappaEstimate kappa_from_samples(std::span<const double> r, std::span<const double> u, double q,
                                               const GrowthFitOptions& opts = {});

/// (beta - I1(R) - ∫_R^∞ t u^{-q} dt)/6 with the quadratic tail model. Throws NotGlobal.
[[nodiscard]] double kappa_from_identity(const Trajectory& traj);
[[nodiscard]] double kappa_from_identity(const RadialState& last, double beta, double q);

enum class Regime {
  Superlinear,  ///< q > 3/2: (u - κr²)/r → ½ ∫_0^∞ t² u^{-q} dt
  Resonant,     ///< q = 3/2: (u - κr²)/(r log r) → 1/(2κ^{3/2})
  Power,        ///< 1 < q < 3/2: (u - κr²)/r^{4-2q} → chi(q, κ)
};

/// Exact comparison of q with 3/2.
[[nodiscard]] Regime regime_of(double q);
[[nodiscard]] std::string_view to_string(Regime r) noexcept;

/// (1/(2κ^q)) (1/(3-2q) - 1/(4-2q) + 1/(3(5-2q)) - 1/(3(2-2q))) on 1 < q < 3/2.
/// Throws OutOfRegime elsewhere and InvalidParams for κ <= 0.
[[nodiscard]] double chi(double q, double kappa);

struct SecondOrderResult {
  Regime regime = Regime::Superlinear;
  double kappa = 0.0;         ///< κ used in u - κr² and in the prediction
  double measured = 0.0;      ///< extrapolated ratio
  double measured_raw = 0.0;  ///< ratio at the last sample
  double predicted = 0.0;
  /// q > 3/2 only: ∫_0^∞ t² u^{-q} dt without the factor ½; NaN otherwise.
  double alternative = std::numeric_limits<double>::quiet_NaN();
  std::size_t points = 0;
  std::string ratio;
  std::string prediction;
};

/// Ratio (u - κr²)/g(r) for the regime of q, extrapolated over the final window
/// of samples (constant term of a fit with the regime's correction terms).
[[nodiscard]] double second_order_ratio(std::span<const double> r, std::span<const double> u, double q,
                                        double kappa, double window_decades = 1.0);

/// Measured and predicted second-order limits; κ defaults to the identity
/// route. Throws NotGlobal and KappaZero.
[[nodiscard]] SecondOrderResult second_order_limit(const Trajectory& traj, std::optional<double> kappa = {});

struct RateFit {
  double rate = 0.0;       ///< -slope
  double slope = 0.0;
  double intercept = 0.0;  ///< log |c_q| proxy
  double predicted = 0.0;  ///< min(1, 2q-2)
  bool resonant = false;   ///< q == 3/2: the fit is on log(d/t)
  double fit_rms = 0.0;
  /// Residual rms with the slope pinned at the predicted rate, for the pure
  /// e^{-ρt} profile and for the t e^{-ρt} profile.
  double exp_profile_rms = 0.0;
  double texp_profile_rms = 0.0;
  double t_begin = 0.0;
  double t_end = 0.0;
  double terminal_distance = 0.0;
  std::size_t points = 0;
};

struct RateFitOptions {
  double window_decades = 1.0;
  double floor = 1e-8;  ///< distances below this are integration noise
};

/// Line fit of log |P(t) - p2| against t over the final window. Throws
/// NotConverged when the terminal distance is >= 0.1 or too few points remain.
[[nodiscard]] RateFit fit_convergence_rate(const PhasePath& path, double q, const RateFitOptions& opts = {});

struct ScalingMap {
  double q = 0.0;
  double source_kappa = 0.0;
  double target_kappa = 0.0;
  double delta = 0.0;  ///< -2/(q-1)
  double alpha = 0.0;  ///< (q+1)/(2(q-1))

  [[nodiscard]] double ratio() const noexcept { return target_kappa / source_kappa; }
  [[nodiscard]] double amplitude() const;  ///< ratio^delta
  [[nodiscard]] double dilation() const;   ///< ratio^alpha
};

/// Throws DegenerateScaling for q <= 1 and InvalidParams for non-positive κ.
[[nodiscard]] ScalingMap make_scaling_map(double q, double source_kappa, double target_kappa);

/// ũ(r) = λ^δ u(λ^α r) with λ = target/kappa, expressed as an IVP.
struct ScaledProblem {
  ScalingMap map;
  ProblemParams params;  ///< u0 ↦ λ^δ u0, beta ↦ λ beta
};

[[nodiscard]] ScaledProblem scale_to_target(const ProblemParams& params, double kappa, double target);

/// The two-solution construction: w = u_{β2} rescaled to growth κ1 (or left
/// alone when κ1 == κ2), then both rescaled to growth `target`.
struct PairConstruction {
  bool equal_kappa = false;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  ProblemParams v1;
  ProblemParams v2;
};

[[nodiscard]] PairConstruction construct_pair(const ProblemParams& u1, double kappa1, const ProblemParams& u2,
                                              double kappa2, double target);

struct WitnessOptions {
  double beta_star = 0.0;  ///< threshold for q; both betas must exceed it
  double r_stop = 1e5;
  Controls controls{};
};

struct WitnessReport {
  double q = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double target = 0.0;
  PairConstruction construction;
  double growth1 = 0.0;  ///< identity-route κ of the re-integrated v1
  double growth2 = 0.0;
  double separation = 0.0;
  std::string certificate;  ///< "initial-value" or "max-norm"
};

/// Throws InvalidParams for beta1 == beta2 and BelowThreshold when either beta
/// is not above opts.beta_star.
[[nodiscard]] WitnessReport distinct_pair_witness(double q, double beta1, double beta2, double target,
                                                  const WitnessOptions& opts);

struct ConsistencyCheck {
  double growth_vs_identity = 0.0;  ///< relative differences
  double growth_vs_gamma = 0.0;
  double identity_vs_gamma = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct AsymptoticsReport {
  double q = 0.0;
  double beta = 0.0;
  double r_stop = 0.0;
  KappaEstimate kappa_growth;
  double kappa_identity = 0.0;
  double gamma_over_6 = 0.0;
  ConsistencyCheck consistency;
  std::optional<SecondOrderResult> second_order;
  std::optional<RateFit> rate_fit;
  std::vector<std::string> flags;  ///< sub-analyses that could not be carried out, with the reason
};

/// Relative tolerance for the three κ routes: 1e-4 for q >= 2, else 1e-3.
[[nodiscard]] double kappa_consistency_tolerance(double q) noexcept;

/// Runs every route on a Global trajectory. Throws NotGlobal.
[[nodiscard]] AsymptoticsReport analyze(const Trajectory& traj);

}  // namespace biharm
