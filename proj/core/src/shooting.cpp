#include "biharm/shooting.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace biharm {

bool global_side(const SolutionClass& c) noexcept { return std::holds_alternative<Global>(c); }

Classification classify_beta_run(double q, double beta, const ClassifyOptions& opts) {
  ProblemParams p;
  p.q = q;
  p.beta = beta;
  p.r_stop = opts.horizon;
  p.validate();

  Trajectory traj = integrate(p, opts.integration);
  const auto* undetermined = std::get_if<Undetermined>(&traj.classification);
  if (undetermined == nullptr || undetermined->kind != UndeterminedKind::NegativeTailLimit) {
    SolutionClass cls = traj.classification;
    return {std::move(cls), std::move(traj), false};
  }

  p.r_stop = 2.0 * opts.horizon;
  traj = integrate(p, opts.integration);
  SolutionClass cls = traj.classification;
  const bool flagged = std::holds_alternative<Undetermined>(cls);
  return {std::move(cls), std::move(traj), flagged};
}

SolutionClass classify_beta(double q, double beta, const ClassifyOptions& opts) {
  return classify_beta_run(q, beta, opts).cls;
}

Bracket auto_bracket(double q, const ClassifyOptions& opts) {
  bool have_blow_down = false;
  double last_blow_down = 0.0;
  for (int k = -20; k <= 20; ++k) {
    const double beta = std::ldexp(1.0, k);
    const bool global = global_side(classify_beta(q, beta, opts));
    if (!global) {
      have_blow_down = true;
      last_blow_down = beta;
    } else if (have_blow_down) {
      return {last_blow_down, beta};
    } else {
      throw Error(Errc::NoBracket, "already global at beta = 2^-20 for q = " + canonical_q(q));
    }
  }
  throw Error(Errc::NoBracket, "no global solution for beta <= 2^20 at q = " + canonical_q(q));
}

ShootingResult find_beta_star(double q, std::optional<Bracket> bracket, double tol,
                              const ShootingOptions& opts) {
  if (!(q > 1.0)) throw Error(Errc::InvalidParams, "q must be > 1");
  if (!(tol > 0.0)) throw Error(Errc::InvalidParams, "tolerance must be positive");

  ShootingResult result;
  result.q = q;
  if (!bracket) bracket = auto_bracket(q, opts.classify);
  if (!(bracket->lo > 0.0) || !(bracket->lo < bracket->hi)) {
    throw Error(Errc::NoBracket, "bracket must satisfy 0 < lo < hi");
  }

  Classification lo_run = classify_beta_run(q, bracket->lo, opts.classify);
  Classification hi_run = classify_beta_run(q, bracket->hi, opts.classify);
  result.classifications += 2;
  if (global_side(lo_run.cls) || !global_side(hi_run.cls)) {
    throw Error(Errc::NoBracket, "classifier does not change sign across the bracket");
  }
  result.flagged_runs += lo_run.flagged ? 1 : 0;

  double lo = bracket->lo;
  double hi = bracket->hi;
  while (hi - lo > tol) {
    if (result.iterations >= opts.max_iterations) {
      throw Error(Errc::MaxIterations, "bisection did not reach the requested width");
    }
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;  // bracket at floating-point resolution
    Classification run = classify_beta_run(q, mid, opts.classify);
    ++result.classifications;
    ++result.iterations;
    result.flagged_runs += run.flagged ? 1 : 0;
    if (global_side(run.cls)) {
      hi = mid;
      hi_run = std::move(run);
    } else {
      lo = mid;
      lo_run = std::move(run);
    }
  }

  result.beta_lo = lo;
  result.beta_hi = hi;
  result.beta_star = 0.5 * (lo + hi);
  result.gamma_at_bracket = std::get<Global>(hi_run.cls).gamma;
  result.lo_flagged = lo_run.flagged;
  if (opts.keep_trajectories) {
    result.lo_trajectory = std::move(lo_run.trajectory);
    result.hi_trajectory = std::move(hi_run.trajectory);
  }
  return result;
}

GammaEstimate gamma_estimate(const Trajectory& traj) {
  const RadialState& last = traj.back();
  const double q = traj.params.q;
  GammaEstimate est;
  est.raw = last.v;
  est.r_stop = last.r;
  est.moment_term = last.I[1] / last.r;
  est.tail = quadratic_tail(1, last.r, last.u, q);
  est.corrected = est.raw - est.moment_term - est.tail;
  est.model = "v(R) - I2(R)/R - R^2 u(R)^-q/(2q-2), tail from u(t) ~ u(R)(t/R)^2";
  return est;
}

GammaEstimate gamma_limit(const Trajectory& traj) {
  if (!is_global(traj.classification)) {
    throw Error(Errc::NotGlobal, "gamma limit needs a global trajectory, got " + describe(traj.classification));
  }
  return gamma_estimate(traj);
}

std::string canonical_q(double q) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), q);
  return std::string(buf, res.ptr);
}

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

BetaStarCache::BetaStarCache(std::filesystem::path path) : path_(std::move(path)) {
  std::error_code ec;
  if (!std::filesystem::exists(path_, ec)) return;
  std::ifstream in(path_);
  if (!in) throw Error(Errc::Io, "cannot read cache " + path_.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Io, "malformed cache " + path_.string() + ": " + e.what());
  }
  for (const auto& [key, val] : doc.items()) {
    CacheEntry e;
    e.beta_lo = val.at("beta_lo").get<double>();
    e.beta_hi = val.at("beta_hi").get<double>();
    e.tol = val.at("tol").get<double>();
    e.horizon = val.at("horizon").get<double>();
    e.timestamp = val.value("timestamp", "");
    entries_[key] = e;
  }
}

std::optional<CacheEntry> BetaStarCache::lookup(double q, double tol, double horizon) const {
  const auto it = entries_.find(canonical_q(q));
  if (it == entries_.end()) return std::nullopt;
  if (it->second.tol > tol || it->second.horizon != horizon) return std::nullopt;
  return it->second;
}

void BetaStarCache::store(double q, const CacheEntry& entry) { entries_[canonical_q(q)] = entry; }

void BetaStarCache::save() const {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [key, e] : entries_) {
    doc[key] = {{"beta_lo", e.beta_lo},
                {"beta_hi", e.beta_hi},
                {"tol", e.tol},
                {"horizon", e.horizon},
                {"timestamp", e.timestamp}};
  }
  std::filesystem::path tmp = path_;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + tmp.string());
    out << doc.dump(2) << '\n';
    if (!out) throw Error(Errc::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path_, ec);
  if (ec) throw Error(Errc::Io, "cannot replace " + path_.string() + ": " + ec.message());
}

ResolvedThreshold resolve_beta_star(double q, double tol, BetaStarCache* cache,
                                    const ShootingOptions& opts) {
  ResolvedThreshold out;
  if (cache != nullptr) {
    if (auto hit = cache->lookup(q, tol, opts.classify.horizon)) {
      out.entry = *hit;
      out.cache_hit = true;
      return out;
    }
  }
  ShootingResult res = find_beta_star(q, std::nullopt, tol, opts);
  out.entry = CacheEntry{res.beta_lo, res.beta_hi, tol, opts.classify.horizon, utc_timestamp()};
  out.computed = std::move(res);
  if (cache != nullptr) {
    cache->store(q, out.entry);
    cache->save();
  }
  return out;
}

}  // namespace biharm
