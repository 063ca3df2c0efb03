#pragma once

// Closed-form radial solutions of Δ²u + u^{-q} = 0 in R³ and a finite-difference
// residual checker that is independent of the integrator.

#include <array>
#include <span>
#include <vector>

#include "biharm/radial_ode.hpp"

namespace biharm::oracles {

struct RadialValues {
  double u = 0.0;
  double du = 0.0;
  double v = 0.0;  ///< Δu
  double dv = 0.0;
};

/// c = 15^{-1/8}: the multiple for which c·sqrt(1 + r²) solves the q = 7 equation.
[[nodiscard]] double entire_q7_scale();
/// a = 15^{-1/2}: sqrt(1 + a r²) is the q = 7 solution normalized to u(0) = 1.
[[nodiscard]] double entire_q7_dilation();
/// Δu(0) = 3a = 3/sqrt(15) of the normalized q = 7 solution (the q = 7 threshold).
[[nodiscard]] double entire_q7_threshold();

/// normalized: u = sqrt(1 + r²/sqrt(15)); otherwise u = 15^{-1/8} sqrt(1 + r²).
[[nodiscard]] RadialValues exact_entire_q7(double r, bool normalized);

struct SingularPowerConstants {
  double tau = 0.0;  ///< 4/(q+1)
  double K = 0.0;    ///< tau (2 - tau)(tau + 1)(tau - 1)
  double A = 0.0;    ///< K^{-1/(q+1)}
};

/// Throws OutOfRange unless 1 < q < 3.
[[nodiscard]] SingularPowerConstants singular_power_constants(double q);

/// u = A r^tau on r > 0, singular at the origin.
[[nodiscard]] RadialValues exact_singular_power(double q, double r);

enum class ExactKind { EntireQ7, SingularPower };

class ExactSolution {
 public:
  static ExactSolution entire_q7(bool normalized);
  static ExactSolution singular_power(double q);

  [[nodiscard]] ExactKind kind() const noexcept { return kind_; }
  [[nodiscard]] double q() const noexcept { return q_; }
  [[nodiscard]] RadialValues at(double r) const;

  /// Δ²u + u^{-q} evaluated with closed-form derivatives: Δv from v', v''.
  [[nodiscard]] double equation_residual(double r) const;

  /// State at radius r with moments seeded from the IVP series (EntireQ7 only
  /// has a regular origin; the moments are O(r²) and taken from the series).
  [[nodiscard]] RadialState state_at(double r) const;

 private:
  ExactSolution(ExactKind kind, double q, bool normalized) : kind_(kind), q_(q), normalized_(normalized) {}
  ExactKind kind_;
  double q_;
  bool normalized_;
};

/// The four integrals of the representation of u - κr², evaluated by
/// quadrature for u = κt², as coefficients of r^{4-2q} (1 < q < 3/2):
///   ½∫_0^1 t² u^{-q}, -½∫_0^1 t³ u^{-q}, (1/6)∫_0^1 t⁴ u^{-q}, (1/6)∫_1^∞ t u^{-q}.
struct ChiQuadrature {
  std::array<double, 4> terms{};
  double sum = 0.0;
};

/// Throws OutOfRange unless 1 < q < 3/2 and kappa > 0.
[[nodiscard]] ChiQuadrature chi_quadrature(double q, double kappa);

struct ResidualGrid {
  std::vector<double> r;         ///< interior radii where the residual is defined
  std::vector<double> residual;  ///< Δ²u + u^{-q}
  double max_norm = 0.0;
};

/// Applies the radial Laplacian u'' + (2/r)u' twice with three-point
/// second-order differences on a (possibly nonuniform) strictly increasing
/// grid; the residual lives on r[2 .. n-3]. Throws GridTooCoarse for fewer
/// than 5 points and InvalidParams for a non-increasing grid or u <= 0.
[[nodiscard]] ResidualGrid biharmonic_residual(std::span<const double> r, std::span<const double> u,
                                               double q);

}  // namespace biharm::oracles
