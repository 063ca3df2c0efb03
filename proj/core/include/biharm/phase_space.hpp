#pragma once

// Emden–Fowler coordinates in t = log r:
//   x = r u'/u,  y = r v'/v,  z = r² v/u,  w = r² u^{-q}/v
// turn the radial system into the autonomous quadratic field
//   x' = x(-1-x) + z,  y' = y(-1-y) - w,  z' = z(2-x+y),  w' = w(2-qx-y).

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "biharm/radial_ode.hpp"

namespace biharm {

struct PhasePoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double w = 0.0;
  double t = 0.0;  ///< log r; zero for points not taken from a trajectory

  [[nodiscard]] std::array<double, 4> coords() const noexcept { return {x, y, z, w}; }
  static PhasePoint from_coords(const std::array<double, 4>& c, double t = 0.0) noexcept;
};

using Vec4 = std::array<double, 4>;
using Mat4 = std::array<std::array<double, 4>, 4>;
using Complex = std::complex<double>;

/// Throws DegenerateState when v == 0 and InvalidParams when r <= 0 or u <= 0.
[[nodiscard]] PhasePoint to_phase(const RadialState& s, double q);

/// Recovers (r, u', v, v') from a phase point given u at r = e^t. The moment
/// accumulators are left at zero.
[[nodiscard]] RadialState from_phase(const PhasePoint& p, double u);

[[nodiscard]] Vec4 phase_field(const Vec4& p, double q) noexcept;
[[nodiscard]] Vec4 phase_field(const PhasePoint& p, double q) noexcept;

struct NamedPoint {
  std::string name;
  Vec4 point;
};

struct CriticalPointSet {
  double q = 0.0;
  double a = 0.0;  ///< 4/(q+1)
  std::array<NamedPoint, 9> points;
};

/// p0..p8. Throws InvalidParams for q <= 1.
[[nodiscard]] CriticalPointSet fixed_points(double q);

/// Exact Jacobian of phase_field:
///   (-2x-1, 0, 1, 0), (0, -2y-1, 0, -1), (-z, z, 2-x+y, 0), (-qw, -w, 0, 2-qx-y).
[[nodiscard]] Mat4 jacobian(const Vec4& p, double q) noexcept;

/// Monic coefficients c[0..3] of det(λI - m) = λ⁴ + c3 λ³ + c2 λ² + c1 λ + c0
/// by the Faddeev–LeVerrier recursion.
[[nodiscard]] std::array<double, 4> characteristic_polynomial(const Mat4& m) noexcept;

struct EigenOptions {
  int max_iterations = 500;
  double tol = 1e-14;
};

/// Durand–Kerner on the characteristic polynomial, one Newton pass per root,
/// then repeated roots are re-solved on the matching derivative. Sorted by
/// (real, imag). Throws NoConvergence if the simultaneous iteration stalls.
[[nodiscard]] std::array<Complex, 4> eigenvalues(const Mat4& m, const EigenOptions& opts = {});

/// Greedy nearest matching of two multisets; the largest matched distance.
[[nodiscard]] double multiset_distance(const std::array<Complex, 4>& a, const std::array<Complex, 4>& b);

struct LinearizationReport {
  NamedPoint point;
  Mat4 jacobian{};
  std::array<Complex, 4> eigenvalues{};
};

[[nodiscard]] LinearizationReport linearize(const NamedPoint& p, double q);

struct PhasePath {
  std::vector<PhasePoint> points;
  std::vector<std::size_t> skipped;  ///< sample indices with v == 0
  /// max over interior points of |d(x,y,z,w)/dt - phase_field| (central
  /// differences on the sample grid, nonuniform spacing allowed)
  double residual = 0.0;
  double residual_t = 0.0;  ///< where the maximum occurs
  std::size_t interior = 0; ///< number of points the residual was taken over
};

/// Maps every sample; degenerate samples are skipped and listed. Throws
/// DegenerateState when fewer than one sample survives.
[[nodiscard]] PhasePath phase_trajectory(const Trajectory& traj, double q);

/// Same, for a bare list of states.
[[nodiscard]] PhasePath phase_trajectory(const std::vector<RadialState>& samples, double q);

[[nodiscard]] double distance(const PhasePoint& p, const Vec4& target) noexcept;

}  // namespace biharm
