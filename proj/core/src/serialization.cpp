#include "biharm/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace biharm {

using nlohmann::json;

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_trajectory_csv(std::ostream& out, const std::vector<RadialState>& samples) {
  out << kTrajectoryCsvHeader << '\n';
  for (const auto& s : samples) {
    out << format_double(s.r) << ',' << format_double(s.u) << ',' << format_double(s.du) << ','
        << format_double(s.v) << ',' << format_double(s.dv);
    for (double x : s.I) out << ',' << format_double(x);
    for (double x : s.J) out << ',' << format_double(x);
    out << '\n';
  }
}

void write_phase_csv(std::ostream& out, const PhasePath& path) {
  out << kPhaseCsvHeader << '\n';
  for (const auto& p : path.points) {
    out << format_double(p.t) << ',' << format_double(p.x) << ',' << format_double(p.y) << ','
        << format_double(p.z) << ',' << format_double(p.w) << '\n';
  }
}

std::vector<RadialState> read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTrajectoryCsvHeader) {
    throw Error(Errc::Io, "trajectory CSV header mismatch");
  }
  std::vector<RadialState> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    StateVector y{};
    double r = 0.0;
    std::istringstream fields(line);
    std::string cell;
    std::size_t k = 0;
    while (std::getline(fields, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0' || k > kStateSize) {
        throw Error(Errc::Io, "malformed trajectory CSV row " + std::to_string(row));
      }
      if (k == 0) r = v;
      else y[k - 1] = v;
      ++k;
    }
    if (k != kStateSize + 1) throw Error(Errc::Io, "wrong column count in row " + std::to_string(row));
    out.push_back(RadialState::unpack(r, y));
  }
  return out;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot open " + tmp.string());
    out << content;
    if (!out) throw Error(Errc::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::Io, "cannot rename onto " + path.string() + ": " + ec.message());
}

namespace {

json complex_list(const std::array<Complex, 4>& ev) {
  json arr = json::array();
  for (const auto& e : ev) arr.push_back({e.real(), e.imag()});
  return arr;
}

json matrix(const Mat4& m) {
  json arr = json::array();
  for (const auto& row : m) arr.push_back(row);
  return arr;
}

}  // namespace

json fixed_point_report(double q) {
  json arr = json::array();
  for (const auto& p : fixed_points(q).points) arr.push_back(linearize(p, q));
  return arr;
}

void to_json(json& j, const LinearizationReport& r) {
  j = {{"name", r.point.name},
       {"point", r.point.point},
       {"jacobian", matrix(r.jacobian)},
       {"eigenvalues", complex_list(r.eigenvalues)}};
}

void to_json(json& j, const ProblemParams& p) {
  j = {{"q", p.q}, {"beta", p.beta}, {"u0", p.u0}, {"r_seed", p.r_seed}, {"r_stop", p.r_stop}};
}

void from_json(const json& j, ProblemParams& p) {
  p.q = j.at("q").get<double>();
  p.beta = j.at("beta").get<double>();
  p.u0 = j.value("u0", 1.0);
  p.r_seed = j.value("r_seed", 1e-4);
  p.r_stop = j.value("r_stop", 1e5);
}

void to_json(json& j, const Controls& c) {
  j = {{"rtol", c.rtol},
       {"atol", c.atol},
       {"max_step_factor", c.max_step_factor},
       {"u_min", c.u_min},
       {"samples_per_decade", c.samples_per_decade},
       {"max_steps", c.max_steps},
       {"collapse_horizon_factor", c.collapse_horizon_factor}};
}

void to_json(json& j, const StepStats& s) {
  j = {{"accepted", s.accepted},
       {"rejected", s.rejected},
       {"min_step", std::isfinite(s.min_step) ? json(s.min_step) : json(nullptr)},
       {"max_step", s.max_step}};
}

void to_json(json& j, const SolutionClass& c) {
  if (const auto* b = std::get_if<BlowDown>(&c)) {
    j = {{"kind", "BlowDown"}, {"r_max", b->r_max}, {"localized", b->localized}};
  } else if (const auto* g = std::get_if<Global>(&c)) {
    j = {{"kind", "Global"}, {"gamma", g->gamma}};
  } else {
    const auto& u = std::get<Undetermined>(c);
    j = {{"kind", "Undetermined"},
         {"reason", u.reason},
         {"detail", u.kind == UndeterminedKind::NegativeTailLimit ? "negative-tail-limit" : "collapse-beyond-horizon"}};
  }
}

void to_json(json& j, const GammaEstimate& g) {
  j = {{"raw", g.raw},
       {"moment_term", g.moment_term},
       {"tail", g.tail},
       {"corrected", g.corrected},
       {"r_stop", g.r_stop},
       {"model", g.model}};
}

void to_json(json& j, const ShootingResult& r) {
  j = {{"q", r.q},
       {"beta_lo", r.beta_lo},
       {"beta_hi", r.beta_hi},
       {"beta_star", r.beta_star},
       {"gamma_at_bracket", r.gamma_at_bracket},
       {"iterations", r.iterations},
       {"classifications", r.classifications},
       {"lo_flagged", r.lo_flagged},
       {"flagged_runs", r.flagged_runs}};
}

void to_json(json& j, const CacheEntry& e) {
  j = {{"beta_lo", e.beta_lo},
       {"beta_hi", e.beta_hi},
       {"beta_star", e.beta_star()},
       {"tol", e.tol},
       {"horizon", e.horizon},
       {"timestamp", e.timestamp}};
}

void to_json(json& j, const KappaEstimate& k) {
  j = {{"value", k.value},
       {"error_bar", k.error_bar},
       {"raw", k.raw},
       {"rate", k.rate},
       {"points", k.points},
       {"model", k.model}};
}

void to_json(json& j, const SecondOrderResult& s) {
  j = {{"regime", to_string(s.regime)},
       {"kappa", s.kappa},
       {"measured", s.measured},
       {"measured_raw", s.measured_raw},
       {"predicted", s.predicted},
       {"alternative_without_half", std::isfinite(s.alternative) ? json(s.alternative) : json(nullptr)},
       {"points", s.points},
       {"ratio", s.ratio},
       {"prediction", s.prediction}};
}

void to_json(json& j, const RateFit& f) {
  j = {{"rate", f.rate},
       {"slope", f.slope},
       {"intercept", f.intercept},
       {"amplitude_abs", std::exp(f.intercept)},
       {"predicted", f.predicted},
       {"resonant", f.resonant},
       {"fit_rms", f.fit_rms},
       {"exp_profile_rms", f.exp_profile_rms},
       {"texp_profile_rms", f.texp_profile_rms},
       {"t_begin", f.t_begin},
       {"t_end", f.t_end},
       {"terminal_distance", f.terminal_distance},
       {"points", f.points}};
}

void to_json(json& j, const ScalingMap& m) {
  j = {{"q", m.q},
       {"source_kappa", m.source_kappa},
       {"target_kappa", m.target_kappa},
       {"delta", m.delta},
       {"alpha", m.alpha},
       {"amplitude", m.amplitude()},
       {"dilation", m.dilation()}};
}

void to_json(json& j, const PairConstruction& p) {
  j = {{"equal_kappa", p.equal_kappa}, {"kappa1", p.kappa1}, {"kappa2", p.kappa2}, {"v1", p.v1}, {"v2", p.v2}};
}

void to_json(json& j, const WitnessReport& w) {
  j = {{"q", w.q},
       {"beta1", w.beta1},
       {"beta2", w.beta2},
       {"target", w.target},
       {"construction", w.construction},
       {"growth1", w.growth1},
       {"growth2", w.growth2},
       {"separation", w.separation},
       {"certificate", w.certificate}};
}

void to_json(json& j, const ConsistencyCheck& c) {
  j = {{"growth_vs_identity", c.growth_vs_identity},
       {"growth_vs_gamma", c.growth_vs_gamma},
       {"identity_vs_gamma", c.identity_vs_gamma},
       {"tolerance", c.tolerance},
       {"pass", c.pass}};
}

void to_json(json& j, const AsymptoticsReport& r) {
  j = {{"q", r.q},
       {"beta", r.beta},
       {"r_stop", r.r_stop},
       {"kappa_growth", r.kappa_growth},
       {"kappa_identity", r.kappa_identity},
       {"gamma_over_6", r.gamma_over_6},
       {"consistency", r.consistency},
       {"second_order", r.second_order ? json(*r.second_order) : json(nullptr)},
       {"rate_fit", r.rate_fit ? json(*r.rate_fit) : json(nullptr)},
       {"flags", r.flags}};
}

}  // namespace biharm
