#include "biharm/oracles.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

namespace biharm::oracles {

// For u = c sqrt(s), s = 1 + a r², in R³ (Δf = f'' + 2f'/r):
//   u'  = c a r s^{-1/2}
//   Δu  = c a (3 + 2a r²) s^{-3/2}
//   Δu' = -c a² r (5 + 2a r²) s^{-5/2}
//   Δu''= -c a² (5 - 14a r² - 4a² r⁴) s^{-7/2}
//   Δ²u = -15 c a² s^{-7/2}
// while u^{-7} = c^{-7} s^{-7/2}, so Δ²u + u^{-7} = 0  <=>  c⁸ a² = 1/15.
// a = 1 gives c = 15^{-1/8}; c = 1 gives a = 15^{-1/2} and Δu(0) = 3a.

namespace {

struct Q7Shape {
  double c;
  double a;
};

Q7Shape q7_shape(bool normalized) {
  return normalized ? Q7Shape{1.0, entire_q7_dilation()} : Q7Shape{entire_q7_scale(), 1.0};
}

RadialValues q7_values(const Q7Shape& p, double r) {
  const double ar2 = p.a * r * r;
  const double s = 1.0 + ar2;
  const double sq = std::sqrt(s);
  RadialValues out;
  out.u = p.c * sq;
  out.du = p.c * p.a * r / sq;
  out.v = p.c * p.a * (3.0 + 2.0 * ar2) / (s * sq);
  out.dv = -p.c * p.a * p.a * r * (5.0 + 2.0 * ar2) / (s * s * sq);
  return out;
}

}  // namespace

double entire_q7_scale() { return std::pow(15.0, -0.125); }
double entire_q7_dilation() { return 1.0 / std::sqrt(15.0); }
double entire_q7_threshold() { return 3.0 / std::sqrt(15.0); }

RadialValues exact_entire_q7(double r, bool normalized) {
  if (!(r >= 0.0)) throw Error(Errc::OutOfRange, "radius must be >= 0");
  return q7_values(q7_shape(normalized), r);
}

SingularPowerConstants singular_power_constants(double q) {
  if (!(q > 1.0 && q < 3.0)) {
    throw Error(Errc::OutOfRange, "singular power solutions need 1 < q < 3");
  }
  SingularPowerConstants k;
  k.tau = 4.0 / (q + 1.0);
  k.K = k.tau * (2.0 - k.tau) * (k.tau + 1.0) * (k.tau - 1.0);
  k.A = std::pow(k.K, -1.0 / (q + 1.0));
  return k;
}

RadialValues exact_singular_power(double q, double r) {
  const SingularPowerConstants k = singular_power_constants(q);
  if (!(r > 0.0)) throw Error(Errc::OutOfRange, "singular power solution needs r > 0");
  const double t = k.tau;
  const double base = k.A * std::pow(r, t);
  RadialValues out;
  out.u = base;
  out.du = t * base / r;
  out.v = t * (t + 1.0) * base / (r * r);
  out.dv = t * (t + 1.0) * (t - 2.0) * base / (r * r * r);
  return out;
}

ExactSolution ExactSolution::entire_q7(bool normalized) {
  return ExactSolution(ExactKind::EntireQ7, 7.0, normalized);
}

ExactSolution ExactSolution::singular_power(double q) {
  (void)singular_power_constants(q);
  return ExactSolution(ExactKind::SingularPower, q, false);
}

RadialValues ExactSolution::at(double r) const {
  return kind_ == ExactKind::EntireQ7 ? exact_entire_q7(r, normalized_) : exact_singular_power(q_, r);
}

double ExactSolution::equation_residual(double r) const {
  if (kind_ == ExactKind::EntireQ7) {
    const Q7Shape p = q7_shape(normalized_);
    const double ar2 = p.a * r * r;
    const double s = 1.0 + ar2;
    const double s72 = std::pow(s, 3.5);
    const double d2v = -p.c * p.a * p.a * (5.0 - 14.0 * ar2 - 4.0 * ar2 * ar2) / s72;
    const RadialValues val = q7_values(p, r);
    const double lap_v = r == 0.0 ? 3.0 * d2v : d2v + 2.0 * val.dv / r;
    return lap_v + std::pow(val.u, -7.0);
  }
  const SingularPowerConstants k = singular_power_constants(q_);
  const double t = k.tau;
  const double lap_v = k.A * t * (t + 1.0) * (t - 2.0) * (t - 1.0) * std::pow(r, t - 4.0);
  return lap_v + std::pow(k.A * std::pow(r, t), -q_);
}

RadialState ExactSolution::state_at(double r) const {
  if (kind_ != ExactKind::EntireQ7) {
    throw Error(Errc::OutOfRange, "moments of the singular power solution diverge at the origin");
  }
  const RadialValues origin = at(0.0);
  ProblemParams p;
  p.q = q_;
  p.u0 = origin.u;
  p.beta = origin.v;
  p.r_seed = r;
  p.r_stop = 2.0 * r;
  RadialState s = series_start(p, r, 1.0);
  const RadialValues val = at(r);
  s.u = val.u;
  s.du = val.du;
  s.v = val.v;
  s.dv = val.dv;
  return s;
}

ChiQuadrature chi_quadrature(double q, double kappa) {
  if (!(q > 1.0 && q < 1.5) || !(kappa > 0.0)) {
    throw Error(Errc::OutOfRange, "chi quadrature needs 1 < q < 3/2 and kappa > 0");
  }
  // t^k u^{-q} = kappa^{-q} t^{k-2q}; written as one power so tiny nodes stay finite.
  const double scale = std::pow(kappa, -q);
  auto moment = [q, scale](double k) {
    return [q, scale, k](double t) { return t > 0.0 ? scale * std::pow(t, k - 2.0 * q) : 0.0; };
  };
  boost::math::quadrature::tanh_sinh<double> finite;
  boost::math::quadrature::exp_sinh<double> infinite;
  ChiQuadrature out;
  out.terms[0] = 0.5 * finite.integrate(moment(2.0), 0.0, 1.0);
  out.terms[1] = -0.5 * finite.integrate(moment(3.0), 0.0, 1.0);
  out.terms[2] = finite.integrate(moment(4.0), 0.0, 1.0) / 6.0;
  out.terms[3] = infinite.integrate(moment(1.0), 1.0, std::numeric_limits<double>::infinity()) / 6.0;
  out.sum = out.terms[0] + out.terms[1] + out.terms[2] + out.terms[3];
  return out;
}

namespace {

// Three-point radial Laplacian at interior node i of a nonuniform grid.
double radial_laplacian(std::span<const double> r, std::span<const double> f, std::size_t i) {
  const double h1 = r[i] - r[i - 1];
  const double h2 = r[i + 1] - r[i];
  const double d1 = (-h2 / (h1 * (h1 + h2))) * f[i - 1] + ((h2 - h1) / (h1 * h2)) * f[i] +
                    (h1 / (h2 * (h1 + h2))) * f[i + 1];
  const double d2 =
      2.0 * (f[i - 1] / (h1 * (h1 + h2)) - f[i] / (h1 * h2) + f[i + 1] / (h2 * (h1 + h2)));
  return d2 + 2.0 * d1 / r[i];
}

}  // namespace

ResidualGrid biharmonic_residual(std::span<const double> r, std::span<const double> u, double q) {
  const std::size_t n = r.size();
  if (u.size() != n) throw Error(Errc::InvalidParams, "radius and value grids differ in length");
  if (n < 5) throw Error(Errc::GridTooCoarse, "need at least 5 grid points");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(u[i] > 0.0)) throw Error(Errc::InvalidParams, "u must be positive on the grid");
    if (i > 0 && !(r[i] > r[i - 1])) throw Error(Errc::InvalidParams, "grid must be strictly increasing");
  }
  if (!(r[0] > 0.0)) throw Error(Errc::InvalidParams, "grid must lie in r > 0");

  std::vector<double> lap(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) lap[i] = radial_laplacian(r, u, i);

  ResidualGrid out;
  out.r.reserve(n - 4);
  out.residual.reserve(n - 4);
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const double res = radial_laplacian(r, lap, i) + std::pow(u[i], -q);
    out.r.push_back(r[i]);
    out.residual.push_back(res);
    out.max_norm = std::max(out.max_norm, std::abs(res));
  }
  return out;
}

}  // namespace biharm::oracles
