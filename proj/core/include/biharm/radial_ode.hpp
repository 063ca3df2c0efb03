#pragma once

// Radial form of  Δ²u + u^{-q} = 0  in R³, split as  Δu = v,  Δv = -u^{-q}.
// With Δf = f'' + (2/r) f' this becomes a first-order system in
// (u, u', v, v') which is augmented with running moments of u^{-q} and v so
// that the exact integral representations of u and v can be checked at
// every sample.

#include <array>
#include <cstddef>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "biharm/error.hpp"

namespace biharm {

/// One instance of the singular initial-value problem
///   u(0) = u0, u'(0) = 0, Δu(0) = beta, (Δu)'(0) = 0.
struct ProblemParams {
  double q = 2.0;
  double beta = 1.0;
  double u0 = 1.0;
  double r_seed = 1e-4;  ///< series hand-off radius
  double r_stop = 1e5;   ///< integration horizon

  /// Throws Error{InvalidParams} unless q > 1, beta > 0, u0 > 0 and
  /// 0 < r_seed < r_stop (all finite).
  void validate() const;
};

inline constexpr std::size_t kStateSize = 10;
using StateVector = std::array<double, kStateSize>;

struct RadialState {
  double r = 0.0;
  double u = 0.0;
  double du = 0.0;
  double v = 0.0;  ///< Δu
  double dv = 0.0;
  std::array<double, 4> I{};  ///< I[k-1] = ∫_0^r t^k u^{-q} dt, k = 1..4
  std::array<double, 2> J{};  ///< J[k-1] = ∫_0^r t^k v dt,      k = 1..2

  [[nodiscard]] StateVector pack() const noexcept;
  static RadialState unpack(double r, const StateVector& y) noexcept;
};

struct Controls {
  double rtol = 1e-10;
  double atol = 1e-12;
  double max_step_factor = 0.1;  ///< h <= max_step_factor * r
  double u_min = 1e-8;           ///< blow-down event threshold
  int samples_per_decade = 40;   ///< geometric output grid density
  std::size_t max_steps = 5'000'000;
  /// Once v <= 0 the solution is certain to collapse at a finite radius, so
  /// integration continues past r_stop, up to r_stop * this factor, to locate it.
  double collapse_horizon_factor = 1e10;
};

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  double min_step = std::numeric_limits<double>::infinity();
  double max_step = 0.0;
};

/// u reached zero at a finite radius. `localized` is true when the u = u_min
/// event was bracketed and bisected; otherwise r_max is the last radius the
/// stepper could resolve before the step size underflowed (v < 0 there, which
/// already certifies collapse).
struct BlowDown {
  double r_max = 0.0;
  bool localized = true;
};

/// The horizon was reached with v > 0 and a non-negative limit estimate
/// (local_tail_corrected_limit).
struct Global {
  double gamma = 0.0;
};

enum class UndeterminedKind {
  NegativeTailLimit,      ///< v(r_stop) > 0 but the estimated limit of v is < 0
  CollapseBeyondHorizon,  ///< v < 0 (collapse certain) but u > 0 up to the extended horizon
};

struct Undetermined {
  UndeterminedKind kind = UndeterminedKind::NegativeTailLimit;
  std::string reason;
};

using SolutionClass = std::variant<BlowDown, Global, Undetermined>;

[[nodiscard]] bool is_global(const SolutionClass& c) noexcept;
[[nodiscard]] bool is_blow_down(const SolutionClass& c) noexcept;
[[nodiscard]] std::string describe(const SolutionClass& c);

struct Trajectory {
  ProblemParams params;
  std::vector<RadialState> samples;  ///< strictly increasing in r
  SolutionClass classification;
  StepStats step_stats;

  [[nodiscard]] const RadialState& front() const { return samples.front(); }
  [[nodiscard]] const RadialState& back() const { return samples.back(); }
};

/// Thrown when the stepper cannot make progress while v > 0; carries the last
/// accepted state.
class StepUnderflowError : public Error {
 public:
  StepUnderflowError(const std::string& what, RadialState last)
      : Error(Errc::StepUnderflow, what), last_(last) {}
  [[nodiscard]] const RadialState& last_state() const noexcept { return last_; }

 private:
  RadialState last_;
};

/// Right-hand side of the augmented system:
///   (u', v - 2u'/r, v', -u^{-q} - 2v'/r, r u^{-q}, r² u^{-q}, r³ u^{-q}, r⁴ u^{-q}, r v, r² v)
/// Throws NonPositiveU for u <= 0 and ZeroRadius for r == 0.
[[nodiscard]] StateVector eval_radial_field(const RadialState& s, double q);

/// Degree-4 Taylor state at radius r0 (0 < r0 <= params.r_seed), including the
/// term-wise integrated moments. Throws SeedTooLarge when the first neglected
/// (r0^6) term exceeds tol relative to max(1, u0, beta).
[[nodiscard]] RadialState series_start(const ProblemParams& params, double r0, double tol = 1e-14);

/// Adaptive Dormand–Prince 5(4) integration from the series start at r_seed.
[[nodiscard]] Trajectory integrate(const ProblemParams& params, const Controls& controls = {});

/// Same as integrate() but starting from an arbitrary state at start.r; used to
/// seed from closed-form solutions.
[[nodiscard]] Trajectory integrate_from(const ProblemParams& params, const RadialState& start,
                                        const Controls& controls = {});

struct RepresentationResidual {
  double res_u = 0.0;  ///< u - [u0 + J1 - J2/r]
  double res_v = 0.0;  ///< v - [beta - I1 + I2/r]
};

[[nodiscard]] RepresentationResidual representation_residual(const ProblemParams& params,
                                                             const RadialState& s) noexcept;

/// Residuals at the sample whose radius equals r (relative match 1e-12).
[[nodiscard]] RepresentationResidual representation_residual(const Trajectory& traj, double r);

/// max over samples of max(|res_u|, |res_v|) / (1 + |u|). The last sample of a
/// BlowDown trajectory sits at u ≈ u_min where the moments are huge and the
/// identity cancels to rounding level only; it can be left out.
[[nodiscard]] double max_representation_defect(const Trajectory& traj, bool include_collapse_sample = true);

/// ∫_R^∞ t^k (u_R (t/R)²)^{-q} dt = R^{k+1} u_R^{-q} / (2q - k - 1); requires 2q > k + 1.
[[nodiscard]] double quadratic_tail(int k, double R, double u_R, double q);

/// v(R) - I2(R)/R - ∫_R^∞ t u^{-q} dt with the quadratic tail model: the
/// finite-horizon estimate of lim v.
[[nodiscard]] double tail_corrected_limit(const RadialState& s, double q);

/// As tail_corrected_limit(), but the tail uses u(t) ~ u(R)(t/R)^x with the
/// local growth exponent x = R u'(R)/u(R). Near the threshold u grows slower
/// than r², where this estimate stays accurate at modest horizons. Returns
/// -inf when q x <= 2 (the modeled tail diverges).
[[nodiscard]] double local_tail_corrected_limit(const RadialState& s, double q);

}  // namespace biharm
