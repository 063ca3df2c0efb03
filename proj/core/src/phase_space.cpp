#include "biharm/phase_space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace biharm {

PhasePoint PhasePoint::from_coords(const std::array<double, 4>& c, double t) noexcept {
  return {c[0], c[1], c[2], c[3], t};
}

PhasePoint to_phase(const RadialState& s, double q) {
  if (!(s.r > 0.0) || !(s.u > 0.0)) throw Error(Errc::InvalidParams, "phase coordinates need r > 0 and u > 0");
  if (s.v == 0.0) throw Error(Errc::DegenerateState, "v = 0 at r = " + std::to_string(s.r));
  const double r2 = s.r * s.r;
  PhasePoint p;
  p.x = s.r * s.du / s.u;
  p.y = s.r * s.dv / s.v;
  p.z = r2 * s.v / s.u;
  p.w = r2 * std::pow(s.u, -q) / s.v;
  p.t = std::log(s.r);
  return p;
}

RadialState from_phase(const PhasePoint& p, double u) {
  if (!(u > 0.0)) throw Error(Errc::InvalidParams, "u must be positive");
  RadialState s;
  s.r = std::exp(p.t);
  s.u = u;
  s.du = p.x * u / s.r;
  s.v = p.z * u / (s.r * s.r);
  s.dv = p.y * s.v / s.r;
  return s;
}

Vec4 phase_field(const Vec4& p, double q) noexcept {
  const auto [x, y, z, w] = p;
  return {x * (-1.0 - x) + z, y * (-1.0 - y) - w, z * (2.0 - x + y), w * (2.0 - q * x - y)};
}

Vec4 phase_field(const PhasePoint& p, double q) noexcept { return phase_field(p.coords(), q); }

CriticalPointSet fixed_points(double q) {
  if (!(q > 1.0) || !std::isfinite(q)) throw Error(Errc::InvalidParams, "q must be > 1");
  CriticalPointSet set;
  set.q = q;
  const double a = 4.0 / (q + 1.0);
  set.a = a;
  set.points = {{
      {"p0", {0.0, 0.0, 0.0, 0.0}},
      {"p1", {1.0, -1.0, 2.0, 0.0}},
      {"p2", {2.0, 0.0, 6.0, 0.0}},
      {"p3", {a, a - 2.0, a * (a + 1.0), (2.0 - a) * (a - 1.0)}},
      {"p4", {0.0, 2.0, 0.0, -6.0}},
      {"p5", {0.0, -1.0, 0.0, 0.0}},
      {"p6", {-1.0, 0.0, 0.0, 0.0}},
      {"p7", {-1.0, -1.0, 0.0, 0.0}},
      {"p8", {-1.0, q + 2.0, 0.0, -(q + 2.0) * (q + 3.0)}},
  }};
  return set;
}

Mat4 jacobian(const Vec4& p, double q) noexcept {
  const auto [x, y, z, w] = p;
  Mat4 m{};
  m[0] = {-2.0 * x - 1.0, 0.0, 1.0, 0.0};
  m[1] = {0.0, -2.0 * y - 1.0, 0.0, -1.0};
  m[2] = {-z, z, 2.0 - x + y, 0.0};
  m[3] = {-q * w, -w, 0.0, 2.0 - q * x - y};
  return m;
}

namespace {

Mat4 multiply(const Mat4& a, const Mat4& b) noexcept {
  Mat4 c{};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k)
      for (int j = 0; j < 4; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

double trace(const Mat4& a) noexcept { return a[0][0] + a[1][1] + a[2][2] + a[3][3]; }

// Monic quartic with lower coefficients c and its derivatives.
struct Quartic {
  std::array<double, 5> a{};  // a[k] multiplies λ^k, a[4] = 1

  [[nodiscard]] Complex eval(Complex z, int order = 0) const {
    // Horner on the order-th derivative.
    Complex acc = 0.0;
    for (int k = 4; k >= order; --k) {
      double f = 1.0;
      for (int j = 0; j < order; ++j) f *= static_cast<double>(k - j);
      acc = acc * z + f * a[static_cast<std::size_t>(k)];
    }
    return acc;
  }

  // Sum |a_k| |z|^k: the scale of rounding errors in eval(z).
  [[nodiscard]] double magnitude(Complex z) const {
    double acc = 0.0;
    const double r = std::abs(z);
    for (int k = 4; k >= 0; --k) acc = acc * r + std::abs(a[static_cast<std::size_t>(k)]);
    return acc;
  }
};

bool less_complex(const Complex& a, const Complex& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

}  // namespace

std::array<double, 4> characteristic_polynomial(const Mat4& m) noexcept {
  // M_1 = I, c_{n-k} = -tr(A M_k)/k, M_{k+1} = A M_k + c_{n-k} I.
  std::array<double, 4> c{};
  Mat4 mk{};
  for (int i = 0; i < 4; ++i) mk[i][i] = 1.0;
  for (int k = 1; k <= 4; ++k) {
    const Mat4 am = multiply(m, mk);
    const double ck = -trace(am) / k;
    c[static_cast<std::size_t>(4 - k)] = ck;
    mk = am;
    for (int i = 0; i < 4; ++i) mk[i][i] += ck;
  }
  return c;
}

std::array<Complex, 4> eigenvalues(const Mat4& m, const EigenOptions& opts) {
  for (const auto& row : m)
    for (double v : row)
      if (!std::isfinite(v)) throw Error(Errc::InvalidParams, "matrix has non-finite entries");

  const auto c = characteristic_polynomial(m);
  Quartic p;
  for (std::size_t k = 0; k < 4; ++k) p.a[k] = c[k];
  p.a[4] = 1.0;

  double bound = 1.0;
  for (double ck : c) bound = std::max(bound, 1.0 + std::abs(ck));

  std::array<Complex, 4> z;
  const Complex seed(0.4, 0.9);
  Complex power = 1.0;
  for (auto& zi : z) {
    power *= seed;
    zi = power * (0.5 * bound);
  }

  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    double worst = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      Complex denom = 1.0;
      for (std::size_t j = 0; j < 4; ++j)
        if (j != i) denom *= z[i] - z[j];
      if (denom == 0.0) denom = opts.tol;
      const Complex step = p.eval(z[i]) / denom;
      z[i] -= step;
      worst = std::max(worst, std::abs(step) / (1.0 + std::abs(z[i])));
    }
    if (worst <= opts.tol) break;
  }

  for (auto& zi : z) {
    const Complex d = p.eval(zi, 1);
    if (d == 0.0) continue;
    const Complex next = zi - p.eval(zi) / d;
    if (std::abs(p.eval(next)) <= std::abs(p.eval(zi))) zi = next;
  }

  for (const auto& zi : z) {
    if (!(std::abs(p.eval(zi)) <= 1e-6 * p.magnitude(zi))) {
      throw Error(Errc::NoConvergence, "Durand-Kerner did not converge");
    }
  }

  // Repeated roots: Durand–Kerner only resolves an m-fold root to about
  // eps^{1/m} (1e-4 for m = 4, worse when the iteration stalls). Replace a
  // cluster by the simple root of p^{(m-1)} near its centre, provided p
  // vanishes there to rounding; otherwise keep the roots.
  std::array<int, 4> group{0, 1, 2, 3};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j)
      if (std::abs(z[i] - z[j]) <= 1e-2 * (1.0 + std::abs(z[i]))) {
        const int from = group[j];
        const int to = group[i];
        for (auto& g : group)
          if (g == from) g = to;
      }
  for (int g = 0; g < 4; ++g) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < 4; ++i)
      if (group[i] == g) members.push_back(i);
    const int mult = static_cast<int>(members.size());
    if (mult < 2) continue;
    Complex centre = 0.0;
    double spread = 0.0;
    for (auto i : members) centre += z[i];
    centre /= static_cast<double>(mult);
    for (auto i : members) spread = std::max(spread, std::abs(z[i] - centre));
    Complex lam = centre;
    for (int k = 0; k < 50; ++k) {
      const Complex d = p.eval(lam, mult);
      if (d == 0.0) break;
      const Complex step = p.eval(lam, mult - 1) / d;
      lam -= step;
      if (std::abs(step) <= 4 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(lam))) break;
    }
    const double eps = std::numeric_limits<double>::epsilon();
    const bool close = std::abs(lam - centre) <= 10.0 * spread + 1e-12 * (1.0 + std::abs(centre));
    if (close && std::abs(p.eval(lam)) <= 64 * eps * p.magnitude(lam)) {
      for (auto i : members) z[i] = lam;
    }
  }

  for (auto& zi : z)
    if (std::abs(zi.imag()) <= 1e-13 * (1.0 + std::abs(zi.real()))) zi.imag(0.0);
  std::sort(z.begin(), z.end(), less_complex);
  return z;
}

double multiset_distance(const std::array<Complex, 4>& a, const std::array<Complex, 4>& b) {
  std::array<bool, 4> used{};
  double worst = 0.0;
  for (const auto& ai : a) {
    std::size_t best = 4;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < 4; ++j) {
      if (used[j]) continue;
      const double d = std::abs(ai - b[j]);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    used[best] = true;
    worst = std::max(worst, best_d);
  }
  return worst;
}

LinearizationReport linearize(const NamedPoint& p, double q) {
  LinearizationReport rep;
  rep.point = p;
  rep.jacobian = jacobian(p.point, q);
  rep.eigenvalues = eigenvalues(rep.jacobian);
  return rep;
}

double distance(const PhasePoint& p, const Vec4& target) noexcept {
  const auto c = p.coords();
  double s = 0.0;
  for (std::size_t i = 0; i < 4; ++i) s += (c[i] - target[i]) * (c[i] - target[i]);
  return std::sqrt(s);
}

PhasePath phase_trajectory(const std::vector<RadialState>& samples, double q) {
  PhasePath path;
  std::vector<std::size_t> source;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].v == 0.0) {
      path.skipped.push_back(i);
      continue;
    }
    path.points.push_back(to_phase(samples[i], q));
    source.push_back(i);
  }
  if (path.points.empty()) throw Error(Errc::DegenerateState, "no sample with v != 0");

  for (std::size_t k = 1; k + 1 < path.points.size(); ++k) {
    if (source[k] - source[k - 1] != 1 || source[k + 1] - source[k] != 1) continue;
    const PhasePoint& a = path.points[k - 1];
    const PhasePoint& b = path.points[k];
    const PhasePoint& c = path.points[k + 1];
    const double h1 = b.t - a.t;
    const double h2 = c.t - b.t;
    const auto ca = a.coords();
    const auto cb = b.coords();
    const auto cc = c.coords();
    const auto f = phase_field(cb, q);
    for (std::size_t j = 0; j < 4; ++j) {
      const double d = (-h2 / (h1 * (h1 + h2))) * ca[j] + ((h2 - h1) / (h1 * h2)) * cb[j] +
                       (h1 / (h2 * (h1 + h2))) * cc[j];
      const double dev = std::abs(d - f[j]);
      if (dev > path.residual) {
        path.residual = dev;
        path.residual_t = b.t;
      }
    }
    ++path.interior;
  }
  return path;
}

PhasePath phase_trajectory(const Trajectory& traj, double q) { return phase_trajectory(traj.samples, q); }

}  // namespace biharm
