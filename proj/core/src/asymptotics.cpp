#include "biharm/asymptotics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>

#include "biharm/shooting.hpp"

namespace biharm {

namespace {

using Basis = std::vector<std::function<double(double)>>;

struct Fit {
  Eigen::VectorXd coef;
  double rms = 0.0;
};

// Least squares y ≈ Σ c_j f_j(r) with column equilibration.
Fit least_squares(std::span<const double> r, std::span<const double> y, const Basis& basis) {
  const auto n = static_cast<Eigen::Index>(r.size());
  const auto m = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd a(n, m);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) a(i, j) = basis[static_cast<std::size_t>(j)](r[static_cast<std::size_t>(i)]);
    b(i) = y[static_cast<std::size_t>(i)];
  }
  Eigen::VectorXd scale(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double s = a.col(j).cwiseAbs().maxCoeff();
    scale(j) = s > 0.0 ? s : 1.0;
    a.col(j) /= scale(j);
  }
  Fit fit;
  fit.coef = a.colPivHouseholderQr().solve(b);
  fit.rms = std::sqrt((a * fit.coef - b).squaredNorm() / static_cast<double>(n));
  fit.coef = fit.coef.cwiseQuotient(scale);
  return fit;
}

// Exponents e > 0 (≤ 2) for correction terms r^{-e}, deduplicated and capped.
std::vector<double> correction_exponents(std::vector<double> candidates, std::size_t cap) {
  std::vector<double> out;
  for (double e : candidates) {
    if (!(e > 0.0) || e > 2.0 + 1e-12) continue;
    bool dup = false;
    for (double k : out) dup = dup || std::abs(k - e) < 0.05;
    if (!dup) out.push_back(e);
    if (out.size() == cap) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::function<double(double)> inverse_power(double e) {
  return [e](double r) { return std::pow(r, -e); };
}

struct Window {
  std::vector<double> r;
  std::vector<double> u;
};

Window final_window(std::span<const double> r, std::span<const double> u, double decades) {
  if (r.size() != u.size() || r.empty()) throw Error(Errc::InvalidParams, "sample arrays differ in length or are empty");
  const double r_end = r.back();
  const double r_begin = r_end * std::pow(10.0, -decades);
  Window w;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] >= r_begin * (1.0 - 1e-12)) {
      w.r.push_back(r[i]);
      w.u.push_back(u[i]);
    }
  }
  return w;
}

void require_global(const Trajectory& traj) {
  if (!is_global(traj.classification)) {
    throw Error(Errc::NotGlobal, "needs a global trajectory, got " + describe(traj.classification));
  }
}

std::pair<std::vector<double>, std::vector<double>> columns(const Trajectory& traj) {
  std::vector<double> r, u;
  r.reserve(traj.samples.size());
  u.reserve(traj.samples.size());
  for (const auto& s : traj.samples) {
    r.push_back(s.r);
    u.push_back(s.u);
  }
  return {std::move(r), std::move(u)};
}

double relative_difference(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace

KappaEstimate kappa_from_samples(std::span<const double> r, std::span<const double> u, double q,
                                 const GrowthFitOptions& opts) {
  if (!(q > 1.0)) throw Error(Errc::InvalidParams, "q must be > 1");
  const Window w = final_window(r, u, opts.window_decades);
  std::vector<double> ratio(w.r.size());
  for (std::size_t i = 0; i < w.r.size(); ++i) ratio[i] = w.u[i] / (w.r[i] * w.r[i]);

  KappaEstimate est;
  est.raw = ratio.empty() ? 0.0 : ratio.back();
  est.points = w.r.size();
  auto one = [](double) { return 1.0; };
  Basis full{one};
  Basis reduced{one};
  if (regime_of(q) == Regime::Resonant) {
    est.rate = 1.0;
    auto lr = [](double x) { return std::log(x) / x; };
    full.insert(full.end(), {lr, inverse_power(1.0)});
    reduced.push_back(lr);
    est.model = "u/r^2 ~ k + a log(r)/r + b/r";
  } else {
    const double p = std::min(1.0, 2.0 * q - 2.0);
    est.rate = p;
    const auto exps = correction_exponents({p, 1.0, 2.0 * p, 2.0 * q - 2.0, 2.0}, 3);
    std::string model = "u/r^2 ~ k";
    for (double e : exps) {
      full.push_back(inverse_power(e));
      model += " + c r^-" + std::to_string(e);
    }
    reduced.push_back(inverse_power(p));
    est.model = model;
  }
  if (w.r.size() < full.size() + 2) {
    throw Error(Errc::PoorFit, "too few samples in the final window for the growth fit");
  }
  const Fit f_full = least_squares(w.r, ratio, full);
  const Fit f_reduced = least_squares(w.r, ratio, reduced);
  est.value = f_full.coef(0);
  est.error_bar = std::max(std::abs(f_full.coef(0) - f_reduced.coef(0)), f_full.rms);
  if (est.error_bar > opts.max_error) {
    throw Error(Errc::PoorFit, "growth fit spread " + std::to_string(est.error_bar) + " exceeds the bound");
  }
  return est;
}

KappaEstimate kappa_from_growth(const Trajectory& traj, const GrowthFitOptions& opts) {
  require_global(traj);
  const auto [r, u] = columns(traj);
  return kappa_from_samples(r, u, traj.params.q, opts);
}

double kappa_from_identity(const RadialState& last, double beta, double q) {
  return (beta - last.I[0] - quadratic_tail(1, last.r, last.u, q)) / 6.0;
}

double kappa_from_identity(const Trajectory& traj) {
  require_global(traj);
  return kappa_from_identity(traj.back(), traj.params.beta, traj.params.q);
}

Regime regime_of(double q) {
  if (q > 1.5) return Regime::Superlinear;
  if (q == 1.5) return Regime::Resonant;
  return Regime::Power;
}

std::string_view to_string(Regime r) noexcept {
  switch (r) {
    case Regime::Superlinear: return "q>3/2";
    case Regime::Resonant: return "q=3/2";
    case Regime::Power: return "q<3/2";
  }
  return "?";
}

double chi(double q, double kappa) {
  if (!(q > 1.0 && q < 1.5)) throw Error(Errc::OutOfRegime, "chi is defined for 1 < q < 3/2");
  if (!(kappa > 0.0)) throw Error(Errc::InvalidParams, "kappa must be positive");
  const double bracket = 1.0 / (3.0 - 2.0 * q) - 1.0 / (4.0 - 2.0 * q) + 1.0 / (3.0 * (5.0 - 2.0 * q)) -
                         1.0 / (3.0 * (2.0 - 2.0 * q));
  return bracket / (2.0 * std::pow(kappa, q));
}

double second_order_ratio(std::span<const double> r, std::span<const double> u, double q, double kappa,
                          double window_decades) {
  const Window w = final_window(r, u, window_decades);
  const Regime regime = regime_of(q);
  std::vector<double> ratio(w.r.size());
  for (std::size_t i = 0; i < w.r.size(); ++i) {
    const double x = w.r[i];
    const double g = regime == Regime::Superlinear ? x
                     : regime == Regime::Resonant  ? x * std::log(x)
                                                   : std::pow(x, 4.0 - 2.0 * q);
    ratio[i] = (w.u[i] - kappa * x * x) / g;
  }
  Basis basis{[](double) { return 1.0; }};
  switch (regime) {
    case Regime::Superlinear:
      for (double e : correction_exponents({1.0, 2.0 * q - 3.0}, 2)) basis.push_back(inverse_power(e));
      if (q == 2.0) basis.push_back([](double x) { return std::log(x) / x; });
      break;
    case Regime::Resonant:
      basis.push_back([](double x) { return 1.0 / std::log(x); });
      break;
    case Regime::Power:
      for (double e : correction_exponents({3.0 - 2.0 * q, 2.0 * q - 2.0, 1.0, 4.0 - 2.0 * q}, 3))
        basis.push_back(inverse_power(e));
      break;
  }
  if (w.r.size() < basis.size() + 2) throw Error(Errc::PoorFit, "too few samples for the second-order fit");
  return least_squares(w.r, ratio, basis).coef(0);
}

SecondOrderResult second_order_limit(const Trajectory& traj, std::optional<double> kappa) {
  require_global(traj);
  const double q = traj.params.q;
  SecondOrderResult res;
  res.regime = regime_of(q);
  res.kappa = kappa ? *kappa : kappa_from_identity(traj);
  if (!(res.kappa > 1e-8 * std::max(1.0, traj.params.beta))) {
    throw Error(Errc::KappaZero, "growth constant is zero to working accuracy; the regime is undefined");
  }
  const auto [r, u] = columns(traj);
  const RadialState& last = traj.back();
  res.measured = second_order_ratio(r, u, q, res.kappa);
  res.points = final_window(r, u, 1.0).r.size();
  const double R = last.r;
  switch (res.regime) {
    case Regime::Superlinear: {
      res.measured_raw = (last.u - res.kappa * R * R) / R;
      const double full = last.I[1] + quadratic_tail(2, R, last.u, q);
      res.predicted = 0.5 * full;
      res.alternative = full;
      res.ratio = "(u - k r^2)/r";
      res.prediction = "1/2 (I2(R) + R^3 u(R)^-q/(2q-3))";
      break;
    }
    case Regime::Resonant:
      res.measured_raw = (last.u - res.kappa * R * R) / (R * std::log(R));
      res.predicted = 1.0 / (2.0 * std::pow(res.kappa, 1.5));
      res.ratio = "(u - k r^2)/(r log r)";
      res.prediction = "1/(2 k^(3/2))";
      break;
    case Regime::Power:
      res.measured_raw = (last.u - res.kappa * R * R) / std::pow(R, 4.0 - 2.0 * q);
      res.predicted = chi(q, res.kappa);
      res.ratio = "(u - k r^2)/r^(4-2q)";
      res.prediction = "chi(q, k)";
      break;
  }
  return res;
}

RateFit fit_convergence_rate(const PhasePath& path, double q, const RateFitOptions& opts) {
  if (path.points.empty()) throw Error(Errc::NotConverged, "empty phase path");
  const Vec4 p2{2.0, 0.0, 6.0, 0.0};
  RateFit fit;
  fit.predicted = std::min(1.0, 2.0 * q - 2.0);
  fit.resonant = regime_of(q) == Regime::Resonant;
  fit.terminal_distance = distance(path.points.back(), p2);
  if (!(fit.terminal_distance < 0.1)) {
    throw Error(Errc::NotConverged, "terminal distance to p2 is " + std::to_string(fit.terminal_distance));
  }

  const double t_end = path.points.back().t;
  const double t_begin = t_end - opts.window_decades * std::log(10.0);
  std::vector<double> t, logd;
  for (const auto& p : path.points) {
    const double d = distance(p, p2);
    if (p.t < t_begin || !(d > opts.floor)) continue;
    t.push_back(p.t);
    logd.push_back(std::log(d));
  }
  if (t.size() < 5) throw Error(Errc::NotConverged, "too few points above the noise floor in the final window");
  fit.points = t.size();
  fit.t_begin = t.front();
  fit.t_end = t.back();

  auto line = [&](const std::vector<double>& y, double& slope, double& intercept) {
    const double n = static_cast<double>(t.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      st += t[i];
      sy += y[i];
      stt += t[i] * t[i];
      sty += t[i] * y[i];
    }
    slope = (n * sty - st * sy) / (n * stt - st * st);
    intercept = (sy - slope * st) / n;
    double ss = 0;
    for (std::size_t i = 0; i < t.size(); ++i) ss += std::pow(y[i] - intercept - slope * t[i], 2);
    return std::sqrt(ss / n);
  };
  // Residual rms of y + rate t about its mean: the slope is not fitted.
  auto pinned = [&](const std::vector<double>& y) {
    double mean = 0;
    for (std::size_t i = 0; i < t.size(); ++i) mean += y[i] + fit.predicted * t[i];
    mean /= static_cast<double>(t.size());
    double ss = 0;
    for (std::size_t i = 0; i < t.size(); ++i) ss += std::pow(y[i] + fit.predicted * t[i] - mean, 2);
    return std::sqrt(ss / static_cast<double>(t.size()));
  };

  std::vector<double> log_over_t(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) log_over_t[i] = logd[i] - std::log(t[i]);
  fit.fit_rms = line(fit.resonant ? log_over_t : logd, fit.slope, fit.intercept);
  fit.rate = -fit.slope;
  fit.exp_profile_rms = pinned(logd);
  fit.texp_profile_rms = pinned(log_over_t);
  return fit;
}

double ScalingMap::amplitude() const { return std::pow(ratio(), delta); }
double ScalingMap::dilation() const { return std::pow(ratio(), alpha); }

ScalingMap make_scaling_map(double q, double source_kappa, double target_kappa) {
  if (!(q > 1.0)) throw Error(Errc::DegenerateScaling, "scaling exponents need q > 1");
  if (!(source_kappa > 0.0) || !(target_kappa > 0.0) || !std::isfinite(source_kappa) ||
      !std::isfinite(target_kappa)) {
    throw Error(Errc::InvalidParams, "growth constants must be positive and finite");
  }
  ScalingMap m;
  m.q = q;
  m.source_kappa = source_kappa;
  m.target_kappa = target_kappa;
  m.delta = -2.0 / (q - 1.0);
  // Written so that (1+q)δ + 4α cancels exactly in floating point.
  m.alpha = -(q + 1.0) * m.delta / 4.0;
  return m;
}

ScaledProblem scale_to_target(const ProblemParams& params, double kappa, double target) {
  ScaledProblem out;
  out.map = make_scaling_map(params.q, kappa, target);
  out.params = params;
  out.params.u0 = out.map.amplitude() * params.u0;
  // δ + 2α = 1, so Δu(0) picks up λ^{δ+2α} = λ.
  out.params.beta = out.map.ratio() * params.beta;
  out.params.validate();
  return out;
}

PairConstruction construct_pair(const ProblemParams& u1, double kappa1, const ProblemParams& u2, double kappa2,
                                double target) {
  PairConstruction pc;
  pc.kappa1 = kappa1;
  pc.kappa2 = kappa2;
  pc.equal_kappa = kappa1 == kappa2;
  ProblemParams w = u2;
  if (!pc.equal_kappa) w = scale_to_target(u2, kappa2, kappa1).params;
  pc.v1 = scale_to_target(u1, kappa1, target).params;
  pc.v2 = scale_to_target(w, kappa1, target).params;
  return pc;
}

WitnessReport distinct_pair_witness(double q, double beta1, double beta2, double target,
                                    const WitnessOptions& opts) {
  if (beta1 == beta2) throw Error(Errc::InvalidParams, "beta1 and beta2 must differ");
  if (!(beta1 > opts.beta_star) || !(beta2 > opts.beta_star)) {
    throw Error(Errc::BelowThreshold, "both betas must exceed the threshold " + std::to_string(opts.beta_star));
  }
  WitnessReport rep;
  rep.q = q;
  rep.beta1 = beta1;
  rep.beta2 = beta2;
  rep.target = target;

  ProblemParams p1;
  p1.q = q;
  p1.beta = beta1;
  p1.r_stop = opts.r_stop;
  ProblemParams p2 = p1;
  p2.beta = beta2;
  const double k1 = kappa_from_identity(integrate(p1, opts.controls));
  const double k2 = kappa_from_identity(integrate(p2, opts.controls));
  rep.construction = construct_pair(p1, k1, p2, k2, target);

  const Trajectory v1 = integrate(rep.construction.v1, opts.controls);
  const Trajectory v2 = integrate(rep.construction.v2, opts.controls);
  rep.growth1 = kappa_from_identity(v1);
  rep.growth2 = kappa_from_identity(v2);

  if (!rep.construction.equal_kappa) {
    rep.separation = std::abs(rep.construction.v1.u0 - rep.construction.v2.u0);
    rep.certificate = "initial-value";
  } else {
    const std::size_t n = std::min(v1.samples.size(), v2.samples.size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = v1.samples[i];
      const auto& b = v2.samples[i];
      if (std::abs(a.r - b.r) > 1e-12 * a.r) break;
      rep.separation = std::max(rep.separation, std::abs(a.u - b.u));
    }
    rep.certificate = "max-norm";
  }
  return rep;
}

double kappa_consistency_tolerance(double q) noexcept { return q >= 2.0 ? 1e-4 : 1e-3; }

AsymptoticsReport analyze(const Trajectory& traj) {
  require_global(traj);
  AsymptoticsReport rep;
  rep.q = traj.params.q;
  rep.beta = traj.params.beta;
  rep.r_stop = traj.back().r;
  rep.kappa_growth = kappa_from_growth(traj);
  rep.kappa_identity = kappa_from_identity(traj);
  rep.gamma_over_6 = gamma_limit(traj).corrected / 6.0;

  auto& c = rep.consistency;
  c.tolerance = kappa_consistency_tolerance(rep.q);
  c.growth_vs_identity = relative_difference(rep.kappa_growth.value, rep.kappa_identity);
  c.growth_vs_gamma = relative_difference(rep.kappa_growth.value, rep.gamma_over_6);
  c.identity_vs_gamma = relative_difference(rep.kappa_identity, rep.gamma_over_6);
  c.pass = c.growth_vs_identity <= c.tolerance && c.growth_vs_gamma <= c.tolerance &&
           c.identity_vs_gamma <= c.tolerance;

  try {
    rep.second_order = second_order_limit(traj, rep.kappa_identity);
  } catch (const Error& e) {
    rep.flags.emplace_back(std::string("second_order: ") + e.what());
  }
  try {
    rep.rate_fit = fit_convergence_rate(phase_trajectory(traj, rep.q), rep.q);
  } catch (const Error& e) {
    rep.flags.emplace_back(std::string("rate_fit: ") + e.what());
  }
  return rep;
}

}  // namespace biharm
