#include "biharm/radial_ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace biharm {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Dormand–Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

bool finite(double x) { return std::isfinite(x); }

// Non-throwing field evaluation for the stepper; false when u <= 0.
bool field(double r, const StateVector& y, double q, StateVector& out) {
  const double u = y[0];
  if (!(u > 0.0) || !finite(u)) return false;
  const double f = std::pow(u, -q);
  const double r2 = r * r;
  out[0] = y[1];
  out[1] = y[2] - 2.0 * y[1] / r;
  out[2] = y[3];
  out[3] = -f - 2.0 * y[3] / r;
  out[4] = r * f;
  out[5] = r2 * f;
  out[6] = r2 * r * f;
  out[7] = r2 * r2 * f;
  out[8] = r * y[2];
  out[9] = r2 * y[2];
  return true;
}

struct StepResult {
  bool ok = false;
  StateVector y{};
  StateVector k7{};
  StateVector err{};
};

// One explicit DP step of size h from (r, y) with k1 = f(r, y).
StepResult dp_step(double r, const StateVector& y, const StateVector& k1, double h, double q) {
  StepResult res;
  StateVector k2, k3, k4, k5, k6, tmp;
  auto stage = [&](auto&& combine, double cr, StateVector& k) {
    for (std::size_t i = 0; i < kStateSize; ++i) tmp[i] = y[i] + h * combine(i);
    return field(r + cr * h, tmp, q, k);
  };
  if (!stage([&](std::size_t i) { return a21 * k1[i]; }, c2, k2)) return res;
  if (!stage([&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; }, c3, k3)) return res;
  if (!stage([&](std::size_t i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; }, c4, k4))
    return res;
  if (!stage([&](std::size_t i) { return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]; },
             c5, k5))
    return res;
  if (!stage(
          [&](std::size_t i) {
            return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i];
          },
          1.0, k6))
    return res;
  for (std::size_t i = 0; i < kStateSize; ++i)
    res.y[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
  if (!field(r + h, res.y, q, res.k7)) return res;
  for (std::size_t i = 0; i < kStateSize; ++i)
    res.err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                      e7 * res.k7[i]);
  res.ok = true;
  return res;
}

double error_norm(const StateVector& y0, const StateVector& y1, const StateVector& err,
                  const Controls& c) {
  double worst = 0.0;
  for (std::size_t i = 0; i < kStateSize; ++i) {
    const double scale = c.atol + c.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    worst = std::max(worst, std::abs(err[i]) / scale);
  }
  return worst;
}

void validate_controls(const Controls& c) {
  if (!(c.rtol >= 64 * kEps) || !(c.atol > 0.0) || !finite(c.rtol) || !finite(c.atol)) {
    throw Error(Errc::ToleranceUnreachable, "rtol must be >= 64 eps and atol > 0");
  }
  if (!(c.max_step_factor > 0.0) || !(c.u_min > 0.0) || c.samples_per_decade < 1 ||
      !(c.collapse_horizon_factor >= 1.0)) {
    throw Error(Errc::InvalidParams, "invalid integrator controls");
  }
}

// Geometric output grid r_k = r0 * exp(k * dt), plus r_stop itself.
class OutputGrid {
 public:
  OutputGrid(double r0, double r_stop, int per_decade)
      : log_r0_(std::log(r0)), dt_(std::log(10.0) / per_decade), r_stop_(r_stop) {}

  [[nodiscard]] double next_after(double r) {
    while (point(k_) <= r * (1.0 + 1e-12)) ++k_;
    const double g = point(k_);
    if (r < r_stop_ && r_stop_ < g * (1.0 - 1e-9)) return r_stop_;
    if (std::abs(g - r_stop_) <= 1e-9 * r_stop_) return r_stop_;
    return g;
  }

 private:
  [[nodiscard]] double point(long k) const { return std::exp(log_r0_ + static_cast<double>(k) * dt_); }

  double log_r0_;
  double dt_;
  double r_stop_;
  long k_ = 1;
};

}  // namespace

void ProblemParams::validate() const {
  std::ostringstream msg;
  if (!finite(q) || !(q > 1.0)) msg << "q must be > 1 (got " << q << "); ";
  if (!finite(beta) || !(beta > 0.0)) msg << "beta must be > 0 (got " << beta << "); ";
  if (!finite(u0) || !(u0 > 0.0)) msg << "u0 must be > 0 (got " << u0 << "); ";
  if (!finite(r_seed) || !finite(r_stop) || !(r_seed > 0.0) || !(r_seed < r_stop))
    msg << "need 0 < r_seed < r_stop (got " << r_seed << ", " << r_stop << "); ";
  if (!msg.str().empty()) throw Error(Errc::InvalidParams, msg.str());
}

StateVector RadialState::pack() const noexcept {
  return {u, du, v, dv, I[0], I[1], I[2], I[3], J[0], J[1]};
}

RadialState RadialState::unpack(double r, const StateVector& y) noexcept {
  RadialState s;
  s.r = r;
  s.u = y[0];
  s.du = y[1];
  s.v = y[2];
  s.dv = y[3];
  s.I = {y[4], y[5], y[6], y[7]};
  s.J = {y[8], y[9]};
  return s;
}

bool is_global(const SolutionClass& c) noexcept { return std::holds_alternative<Global>(c); }
bool is_blow_down(const SolutionClass& c) noexcept { return std::holds_alternative<BlowDown>(c); }

std::string describe(const SolutionClass& c) {
  std::ostringstream out;
  out.precision(17);
  if (const auto* b = std::get_if<BlowDown>(&c)) {
    out << "BlowDown(r_max=" << b->r_max << (b->localized ? "" : ", step-limited") << ")";
  } else if (const auto* g = std::get_if<Global>(&c)) {
    out << "Global(gamma=" << g->gamma << ")";
  } else {
    out << "Undetermined(" << std::get<Undetermined>(c).reason << ")";
  }
  return out.str();
}

StateVector eval_radial_field(const RadialState& s, double q) {
  if (s.r == 0.0) throw Error(Errc::ZeroRadius, "the radial field is singular at r = 0; use series_start");
  StateVector out{};
  if (!field(s.r, s.pack(), q, out)) throw Error(Errc::NonPositiveU, "u <= 0 at r = " + std::to_string(s.r));
  return out;
}

RadialState series_start(const ProblemParams& params, double r0, double tol) {
  params.validate();
  if (!(r0 > 0.0) || r0 > params.r_seed) {
    throw Error(Errc::InvalidParams, "series radius must satisfy 0 < r0 <= r_seed");
  }
  const double q = params.q;
  const double beta = params.beta;
  const double u0 = params.u0;

  // Match u = u0 + u2 r² + u4 r⁴, v = beta + v2 r² + v4 r⁴ against Δu = v,
  // Δv = -u^{-q}, using Δ r^n = n(n+1) r^{n-2}; g2, g4 are the Taylor
  // coefficients of u^{-q}.
  const double f0 = std::pow(u0, -q);
  const double u2 = beta / 6.0;
  const double v2 = -f0 / 6.0;
  const double u4 = v2 / 20.0;
  const double g2 = -q * f0 * u2 / u0;
  const double v4 = -g2 / 20.0;
  const double g4 = f0 * (-q * u4 / u0 + 0.5 * q * (q + 1.0) * (u2 / u0) * (u2 / u0));
  const double u6 = v4 / 42.0;
  const double v6 = -g4 / 42.0;

  const double r2 = r0 * r0;
  const double r4 = r2 * r2;
  const double neglected = std::max(std::abs(u6), std::abs(v6)) * r4 * r2;
  if (neglected > tol * std::max({1.0, u0, beta})) {
    throw Error(Errc::SeedTooLarge, "series truncation error at r0 exceeds tolerance");
  }

  RadialState s;
  s.r = r0;
  s.u = u0 + u2 * r2 + u4 * r4;
  s.du = 2.0 * u2 * r0 + 4.0 * u4 * r2 * r0;
  s.v = beta + v2 * r2 + v4 * r4;
  s.dv = 2.0 * v2 * r0 + 4.0 * v4 * r2 * r0;
  for (int k = 1; k <= 4; ++k) {
    const double rk1 = std::pow(r0, k + 1);
    s.I[k - 1] = rk1 * (f0 / (k + 1) + g2 * r2 / (k + 3) + g4 * r4 / (k + 5));
  }
  for (int k = 1; k <= 2; ++k) {
    const double rk1 = std::pow(r0, k + 1);
    s.J[k - 1] = rk1 * (beta / (k + 1) + v2 * r2 / (k + 3) + v4 * r4 / (k + 5));
  }
  return s;
}

Trajectory integrate(const ProblemParams& params, const Controls& controls) {
  params.validate();
  validate_controls(controls);
  return integrate_from(params, series_start(params, params.r_seed, controls.atol), controls);
}

Trajectory integrate_from(const ProblemParams& params_in, const RadialState& start,
                          const Controls& controls) {
  ProblemParams params = params_in;
  params.r_seed = start.r;
  params.validate();
  validate_controls(controls);
  if (!(start.u > 0.0)) throw Error(Errc::NonPositiveU, "initial state must have u > 0");

  const double q = params.q;
  Trajectory traj;
  traj.params = params;
  traj.samples.push_back(start);
  StepStats& stats = traj.step_stats;

  double r = start.r;
  StateVector y = start.pack();
  StateVector k1{};
  if (!field(r, y, q, k1)) throw Error(Errc::NonPositiveU, "initial state must have u > 0");

  OutputGrid grid(start.r, params.r_stop, controls.samples_per_decade);
  double horizon = params.r_stop;
  bool negative_laplacian = y[2] <= 0.0;
  if (negative_laplacian) horizon = params.r_stop * controls.collapse_horizon_factor;

  double h_ctrl = 1e-2 * r;
  std::size_t steps = 0;

  auto finish_blow_down = [&](double r_max, bool localized) {
    traj.classification = BlowDown{r_max, localized};
  };

  while (true) {
    if (++steps > controls.max_steps) {
      throw Error(Errc::ToleranceUnreachable,
                  "step budget exhausted at r = " + std::to_string(r));
    }
    const double target = std::min(grid.next_after(r), horizon);
    const double h_cap = controls.max_step_factor * r;
    double h = std::min({h_ctrl, h_cap, target - r});
    const bool clipped = h < std::min(h_ctrl, h_cap);

    if (!(h > 64.0 * kEps * r)) {
      RadialState last = RadialState::unpack(r, y);
      if (y[2] < 0.0) {
        if (traj.samples.back().r < r) traj.samples.push_back(last);
        finish_blow_down(r, false);
        break;
      }
      throw StepUnderflowError("step size underflow at r = " + std::to_string(r), last);
    }

    StepResult step = dp_step(r, y, k1, h, q);
    if (!step.ok) {
      // A stage left the domain u > 0: the collapse lies inside this step.
      ++stats.rejected;
      h_ctrl = 0.25 * h;
      continue;
    }
    const double err = error_norm(y, step.y, step.err, controls);
    if (!(err <= 1.0)) {
      ++stats.rejected;
      h_ctrl = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
      continue;
    }

    if (step.y[0] <= controls.u_min) {
      // Localize u = u_min by bisection on the step length.
      double lo = 0.0;
      double hi = h;
      StateVector y_hi = step.y;
      for (int it = 0; it < 200 && hi - lo > 4.0 * kEps * r; ++it) {
        const double mid = 0.5 * (lo + hi);
        StepResult trial = dp_step(r, y, k1, mid, q);
        if (!trial.ok || trial.y[0] <= controls.u_min) {
          hi = mid;
          if (trial.ok) y_hi = trial.y;
        } else {
          lo = mid;
        }
      }
      if (!(y_hi[0] > 0.0)) {
        StepResult trial = dp_step(r, y, k1, lo, q);
        if (trial.ok && lo > 0.0) {
          hi = lo;
          y_hi = trial.y;
        }
      }
      ++stats.accepted;
      stats.min_step = std::min(stats.min_step, hi);
      stats.max_step = std::max(stats.max_step, hi);
      if (hi > 0.0 && y_hi[0] > 0.0) {
        r += hi;
        y = y_hi;
        traj.samples.push_back(RadialState::unpack(r, y));
      }
      finish_blow_down(r, true);
      break;
    }

    ++stats.accepted;
    stats.min_step = std::min(stats.min_step, h);
    stats.max_step = std::max(stats.max_step, h);
    r = (h == target - r) ? target : r + h;
    y = step.y;
    k1 = step.k7;

    const double growth = err == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
    h_ctrl = clipped ? std::max(h_ctrl, h * growth) : h * growth;

    if (!negative_laplacian && y[2] <= 0.0) {
      negative_laplacian = true;
      horizon = params.r_stop * controls.collapse_horizon_factor;
    }
    if (r == target) traj.samples.push_back(RadialState::unpack(r, y));
    if (r >= horizon) break;
  }

  if (r >= horizon) {
    const RadialState& last = traj.samples.back();
    if (negative_laplacian) {
      traj.classification = Undetermined{UndeterminedKind::CollapseBeyondHorizon,
                                         "v < 0 certifies collapse, but u > 0 up to r = " +
                                             std::to_string(last.r)};
    } else {
      const double gamma = local_tail_corrected_limit(last, q);
      if (gamma >= 0.0) {
        traj.classification = Global{gamma};
      } else {
        traj.classification = Undetermined{UndeterminedKind::NegativeTailLimit,
                                           "v(r_stop) > 0 but the estimated limit of v is negative"};
      }
    }
  }
  return traj;
}

RepresentationResidual representation_residual(const ProblemParams& params,
                                               const RadialState& s) noexcept {
  RepresentationResidual res;
  res.res_v = s.v - (params.beta - s.I[0] + s.I[1] / s.r);
  res.res_u = s.u - (params.u0 + s.J[0] - s.J[1] / s.r);
  return res;
}

RepresentationResidual representation_residual(const Trajectory& traj, double r) {
  const auto it = std::lower_bound(traj.samples.begin(), traj.samples.end(), r,
                                   [](const RadialState& s, double x) { return s.r < x * (1.0 - 1e-12); });
  if (it == traj.samples.end() || std::abs(it->r - r) > 1e-12 * std::abs(r)) {
    throw Error(Errc::SampleNotFound, "no sample at r = " + std::to_string(r));
  }
  return representation_residual(traj.params, *it);
}

double max_representation_defect(const Trajectory& traj, bool include_collapse_sample) {
  double worst = 0.0;
  std::size_t n = traj.samples.size();
  if (!include_collapse_sample && is_blow_down(traj.classification) && n > 0) --n;
  for (std::size_t i = 0; i < n; ++i) {
    const RadialState& s = traj.samples[i];
    const RepresentationResidual res = representation_residual(traj.params, s);
    worst = std::max(worst, std::max(std::abs(res.res_u), std::abs(res.res_v)) / (1.0 + std::abs(s.u)));
  }
  return worst;
}

double quadratic_tail(int k, double R, double u_R, double q) {
  const double denom = 2.0 * q - k - 1.0;
  if (!(denom > 0.0)) {
    throw Error(Errc::OutOfRegime, "quadratic tail of t^k u^{-q} diverges for 2q <= k + 1");
  }
  return std::pow(R, k + 1) * std::pow(u_R, -q) / denom;
}

double tail_corrected_limit(const RadialState& s, double q) {
  return s.v - s.I[1] / s.r - quadratic_tail(1, s.r, s.u, q);
}

double local_tail_corrected_limit(const RadialState& s, double q) {
  const double x = s.r * s.du / s.u;
  const double denom = q * x - 2.0;
  if (!(denom > 0.0)) return -std::numeric_limits<double>::infinity();
  return s.v - s.I[1] / s.r - s.r * s.r * std::pow(s.u, -q) / denom;
}

}  // namespace biharm
