#include "biharm_cli/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "biharm/asymptotics.hpp"
#include "biharm/error.hpp"
#include "biharm/phase_space.hpp"
#include "biharm/radial_ode.hpp"
#include "biharm/serialization.hpp"
#include "biharm/shooting.hpp"
#include "biharm/verification.hpp"
#include "biharm/version.hpp"

namespace biharm::cli {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Common {
  double q = kNaN;
  std::optional<double> beta;
  std::optional<double> beta_above_star;
  double r_stop = 1e5;
  double rtol = Controls{}.rtol;
  double atol = Controls{}.atol;
  double star_tol = 1e-6;
  std::string out;
  std::string report;
  std::string cache = "beta_star_cache.json";
  bool no_cache = false;
};

struct ShootArgs {
  double tol = 1e-6;
  std::optional<double> lo;
  std::optional<double> hi;
};

struct ScaleArgs {
  double target = 1.0;
  std::optional<double> beta2;
};

struct VerifyArgs {
  std::vector<std::string> suites;
  std::vector<double> q_list;
};

struct SweepArgs {
  std::vector<double> q_list;
  std::vector<double> offsets;
  std::vector<double> betas;
  unsigned jobs = 0;
};

bool is_validation(Errc c) {
  switch (c) {
    case Errc::InvalidParams:
    case Errc::OutOfRange:
    case Errc::OutOfRegime:
    case Errc::BelowThreshold:
    case Errc::DegenerateScaling:
    case Errc::SeedTooLarge:
      return true;
    default:
      return false;
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::InvalidParams, what);
}

void validate_q(double q) { require(std::isfinite(q) && q > 1.0, "--q must be a finite number > 1"); }

void validate_common(const Common& c) {
  require(std::isfinite(c.rtol) && c.rtol > 0.0, "--rtol must be > 0");
  require(std::isfinite(c.atol) && c.atol > 0.0, "--atol must be > 0");
  require(std::isfinite(c.r_stop) && c.r_stop > ProblemParams{}.r_seed, "--r-stop must exceed the seed radius");
  require(std::isfinite(c.star_tol) && c.star_tol > 0.0, "--star-tol must be > 0");
}

Controls controls_of(const Common& c) {
  Controls k;
  k.rtol = c.rtol;
  k.atol = c.atol;
  return k;
}

json config_of(const Common& c) {
  json j = {{"q", std::isfinite(c.q) ? json(c.q) : json(nullptr)},
            {"r_stop", c.r_stop},
            {"rtol", c.rtol},
            {"atol", c.atol},
            {"star_tol", c.star_tol},
            {"cache", c.no_cache ? json(nullptr) : json(c.cache)}};
  if (c.beta) j["beta"] = *c.beta;
  if (c.beta_above_star) j["beta_above_star"] = *c.beta_above_star;
  if (!c.out.empty()) j["out"] = c.out;
  if (!c.report.empty()) j["report"] = c.report;
  return j;
}

// Owns the threshold cache for the whole run.
class Thresholds {
 public:
  explicit Thresholds(const Common& c) : controls_(controls_of(c)), tol_(c.star_tol) {
    if (!c.no_cache) cache_.emplace(c.cache);
  }

  ResolvedThreshold resolve(double q, double tol, double horizon) {
    ShootingOptions opts;
    opts.classify.integration = controls_;
    opts.classify.horizon = horizon;
    auto res = resolve_beta_star(q, tol, cache_ ? &*cache_ : nullptr, opts);
    if (cache_ && !res.cache_hit) cache_->save();
    return res;
  }

  double beta_star(double q) { return resolve(q, tol_, ClassifyOptions{}.horizon).entry.beta_star(); }


 private:
  Controls controls_;
  double tol_;
  std::optional<BetaStarCache> cache_;
};

ProblemParams params_of(const Common& c, Thresholds& th, json& config) {
  validate_q(c.q);
  validate_common(c);
  require(c.beta.has_value() != c.beta_above_star.has_value(), "give exactly one of --beta and --beta-above-star");
  ProblemParams p;
  p.q = c.q;
  p.r_stop = c.r_stop;
  if (c.beta) {
    p.beta = *c.beta;
  } else {
    require(std::isfinite(*c.beta_above_star), "--beta-above-star must be finite");
    const double star = th.beta_star(c.q);
    config["beta_star"] = star;
    p.beta = star + *c.beta_above_star;
  }
  p.validate();
  config["params"] = p;
  return p;
}

void emit(const json& report, const std::string& path, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (!path.empty()) atomic_write(path, text);
  out << text;
}

void write_csv(const std::string& path, const std::vector<RadialState>& samples) {
  std::ostringstream s;
  write_trajectory_csv(s, samples);
  atomic_write(path, s.str());
}

json header(const std::string& command, const json& config) {
  return {{"command", command}, {"version", kVersion}, {"config", config}};
}

json gamma_json(const Trajectory& traj) {
  try {
    return gamma_estimate(traj);
  } catch (const Error& e) {
    return {{"error", e.what()}};
  }
}

json summarize(const Trajectory& traj) {
  json j = {{"classification", traj.classification},
            {"describe", describe(traj.classification)},
            {"samples", traj.samples.size()},
            {"r_end", traj.back().r},
            {"step_stats", traj.step_stats}};
  if (is_global(traj.classification)) {
    j["gamma"] = gamma_json(traj);
    j["asymptotics"] = analyze(traj);
  }
  return j;
}

int cmd_solve(const Common& c, std::ostream& out) {
  json config = config_of(c);
  Thresholds th(c);
  const ProblemParams p = params_of(c, th, config);
  const Trajectory traj = integrate(p, controls_of(c));
  if (!c.out.empty()) write_csv(c.out, traj.samples);
  json report = header("solve", config);
  report.update(summarize(traj));
  emit(report, c.report, out);
  return kSuccess;
}

int cmd_shoot(const Common& c, const ShootArgs& s, std::ostream& out) {
  validate_q(c.q);
  validate_common(c);
  require(std::isfinite(s.tol) && s.tol > 0.0, "--tol must be > 0");
  require(s.lo.has_value() == s.hi.has_value(), "give both --lo and --hi or neither");
  json config = config_of(c);
  config["tol"] = s.tol;
  json report = header("shoot", config);
  if (s.lo) {
    require(*s.lo > 0.0 && *s.hi > *s.lo, "need 0 < --lo < --hi");
    config["bracket"] = {*s.lo, *s.hi};
    ShootingOptions opts;
    opts.classify.integration = controls_of(c);
    opts.classify.horizon = c.r_stop;
    const auto res = find_beta_star(c.q, Bracket{*s.lo, *s.hi}, s.tol, opts);
    report = header("shoot", config);
    report["cache_hit"] = false;
    report["beta_star"] = res.beta_star;
    report["result"] = res;
  } else {
    Thresholds th(c);
    const auto res = th.resolve(c.q, s.tol, c.r_stop);
    report["cache_hit"] = res.cache_hit;
    report["beta_star"] = res.entry.beta_star();
    report["entry"] = res.entry;
    if (res.computed) report["result"] = *res.computed;
  }
  emit(report, c.report, out);
  return kSuccess;
}

int cmd_phase(const Common& c, std::ostream& out) {
  json config = config_of(c);
  Thresholds th(c);
  const ProblemParams p = params_of(c, th, config);
  const Trajectory traj = integrate(p, controls_of(c));
  const PhasePath path = phase_trajectory(traj, p.q);
  if (!c.out.empty()) {
    std::ostringstream s;
    write_phase_csv(s, path);
    atomic_write(c.out, s.str());
  }
  json report = header("phase", config);
  report["classification"] = traj.classification;
  report["points"] = path.points.size();
  report["skipped"] = path.skipped;
  report["field_residual"] = path.residual;
  report["field_residual_t"] = path.residual_t;
  report["fixed_points"] = fixed_point_report(p.q);
  const auto& last = path.points.back();
  json dist = json::object();
  for (const auto& fp : fixed_points(p.q).points) dist[fp.name] = distance(last, fp.point);
  report["terminal_distance"] = dist;
  emit(report, c.report, out);
  return kSuccess;
}

int cmd_asymptote(const Common& c, std::ostream& out) {
  json config = config_of(c);
  Thresholds th(c);
  const ProblemParams p = params_of(c, th, config);
  const Trajectory traj = integrate(p, controls_of(c));
  if (!c.out.empty()) write_csv(c.out, traj.samples);
  json report = header("asymptote", config);
  report["classification"] = traj.classification;
  report["gamma"] = gamma_limit(traj);
  report["report"] = analyze(traj);
  emit(report, c.report, out);
  return kSuccess;
}

int cmd_scale(const Common& c, const ScaleArgs& s, std::ostream& out) {
  json config = config_of(c);
  config["target"] = s.target;
  require(std::isfinite(s.target) && s.target > 0.0, "--target must be > 0");
  Thresholds th(c);
  const ProblemParams p = params_of(c, th, config);
  const Controls k = controls_of(c);
  json report = header("scale", config);
  if (s.beta2) {
    config["beta2"] = *s.beta2;
    WitnessOptions opts;
    opts.beta_star = th.beta_star(p.q);
    opts.r_stop = p.r_stop;
    opts.controls = k;
    report = header("scale", config);
    report["witness"] = distinct_pair_witness(p.q, p.beta, *s.beta2, s.target, opts);
  } else {
    const Trajectory source = integrate(p, k);
    const double kappa = kappa_from_identity(source);
    const ScaledProblem sp = scale_to_target(p, kappa, s.target);
    const Trajectory scaled = integrate(sp.params, k);
    if (!c.out.empty()) write_csv(c.out, scaled.samples);
    report["source_kappa"] = kappa;
    report["map"] = sp.map;
    report["scaled_params"] = sp.params;
    report["scaled_classification"] = scaled.classification;
    report["scaled_kappa_growth"] = kappa_from_growth(scaled);
    report["scaled_kappa_identity"] = kappa_from_identity(scaled);
  }
  emit(report, c.report, out);
  return kSuccess;
}

int cmd_verify(const Common& c, const VerifyArgs& v, std::ostream& out, std::ostream& err) {
  validate_common(c);
  VerifyConfig cfg;
  cfg.suites = v.suites;
  cfg.q_list = v.q_list;
  if (!c.no_cache) cfg.cache = c.cache;
  cfg.controls = controls_of(c);
  const VerifyReport rep = run_verify(cfg);
  for (const auto& r : rep.records) {
    err << (r.pass ? "PASS " : "FAIL ") << r.suite << '/' << r.check << " q=" << r.q << " measured=" << r.measured
        << " expected=" << r.expected << " tol=" << r.tolerance;
    if (!r.note.empty()) err << " (" << r.note << ')';
    err << '\n';
  }
  json report = rep;
  report["command"] = "verify";
  emit(report, c.report, out);
  return rep.all_pass ? kSuccess : kVerification;
}

int cmd_sweep(const Common& c, const SweepArgs& s, std::ostream& out) {
  validate_common(c);
  require(!s.q_list.empty(), "--q-list is required");
  require(s.offsets.empty() != s.betas.empty(), "give exactly one of --offsets and --betas");
  for (double q : s.q_list) validate_q(q);
  json config = config_of(c);
  config["q_list"] = s.q_list;
  if (!s.offsets.empty()) config["offsets"] = s.offsets;
  if (!s.betas.empty()) config["betas"] = s.betas;

  // Thresholds are resolved up front so that only this thread touches the cache.
  struct Job {
    ProblemParams params;
    double offset = kNaN;
  };
  std::vector<Job> jobs;
  Thresholds th(c);
  for (double q : s.q_list) {
    const double star = s.offsets.empty() ? kNaN : th.beta_star(q);
    for (double b : s.offsets.empty() ? s.betas : s.offsets) {
      Job job;
      job.params.q = q;
      job.params.r_stop = c.r_stop;
      job.params.beta = s.offsets.empty() ? b : star + b;
      job.offset = s.offsets.empty() ? kNaN : b;
      job.params.validate();
      jobs.push_back(job);
    }
  }
  if (!c.out.empty()) std::filesystem::create_directories(c.out);

  const Controls k = controls_of(c);
  const unsigned workers = s.jobs > 0 ? s.jobs : std::max(1u, std::thread::hardware_concurrency());
  config["jobs"] = workers;
  std::vector<json> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      json r = {{"params", job.params}};
      if (std::isfinite(job.offset)) r["offset"] = job.offset;
      try {
        const Trajectory traj = integrate(job.params, k);
        r.update(summarize(traj));
        if (!c.out.empty()) {
          const std::string name = "q" + canonical_q(job.params.q) + "_beta" + format_double(job.params.beta) + ".csv";
          write_csv((std::filesystem::path(c.out) / name).string(), traj.samples);
          r["csv"] = name;
        }
      } catch (const std::exception& e) {
        r["error"] = e.what();
      }
      results[i] = std::move(r);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < std::min<std::size_t>(workers, jobs.size()); ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  json report = header("sweep", config);
  report["results"] = results;
  const bool failed = std::any_of(results.begin(), results.end(), [](const json& r) { return r.contains("error"); });
  emit(report, c.report, out);
  return failed ? kNumeric : kSuccess;
}

void add_common(CLI::App* app, Common& c, bool with_beta) {
  app->add_option("--q", c.q, "nonlinearity exponent, > 1");
  if (with_beta) {
    auto* b = app->add_option("--beta", c.beta, "initial Laplacian");
    auto* a = app->add_option("--beta-above-star", c.beta_above_star, "offset added to the cached threshold");
    b->excludes(a);
  }
  app->add_option("--r-stop", c.r_stop, "integration horizon");
  app->add_option("--rtol", c.rtol, "relative tolerance");
  app->add_option("--atol", c.atol, "absolute tolerance");
  app->add_option("--star-tol", c.star_tol, "bracket width when a threshold has to be computed");
  app->add_option("--out", c.out, "CSV output path");
  app->add_option("--report", c.report, "JSON report path (also printed to stdout)");
  app->add_option("--cache", c.cache, "threshold cache file");
  app->add_flag("--no-cache", c.no_cache, "do not read or write the threshold cache");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Radial solutions of the biharmonic equation with negative exponent", "biharm"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common common;
  ShootArgs shoot;
  ScaleArgs scale;
  VerifyArgs verify;
  SweepArgs sweep;

  auto* solve_cmd = app.add_subcommand("solve", "integrate one initial value problem");
  add_common(solve_cmd, common, true);
  auto* shoot_cmd = app.add_subcommand("shoot", "locate the existence threshold");
  add_common(shoot_cmd, common, false);
  shoot_cmd->add_option("--tol", shoot.tol, "bracket width");
  shoot_cmd->add_option("--lo", shoot.lo, "blow-down side of a known bracket");
  shoot_cmd->add_option("--hi", shoot.hi, "global side of a known bracket");
  auto* phase_cmd = app.add_subcommand("phase", "map a solution into phase space");
  add_common(phase_cmd, common, true);
  auto* asym_cmd = app.add_subcommand("asymptote", "growth constant and second-order analysis");
  add_common(asym_cmd, common, true);
  auto* scale_cmd = app.add_subcommand("scale", "rescale to a prescribed growth constant");
  add_common(scale_cmd, common, true);
  scale_cmd->add_option("--target", scale.target, "target growth constant");
  scale_cmd->add_option("--beta2", scale.beta2, "second initial Laplacian for the distinct-pair witness");
  auto* verify_cmd = app.add_subcommand("verify", "run the verification suites");
  add_common(verify_cmd, common, false);
  verify_cmd->add_option("--suite", verify.suites, "suite name (repeatable or comma separated)")->delimiter(',');
  verify_cmd->add_option("--q-list", verify.q_list, "override each suite's q values")->delimiter(',');
  auto* sweep_cmd = app.add_subcommand("sweep", "run a grid of (q, beta) jobs in parallel");
  add_common(sweep_cmd, common, false);
  sweep_cmd->add_option("--q-list", sweep.q_list, "q values")->delimiter(',');
  sweep_cmd->add_option("--offsets", sweep.offsets, "beta offsets above the threshold")->delimiter(',');
  sweep_cmd->add_option("--betas", sweep.betas, "absolute beta values")->delimiter(',');
  sweep_cmd->add_option("--jobs", sweep.jobs, "worker threads (0: hardware concurrency)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kValidation;
  }

  try {
    if (*solve_cmd) return cmd_solve(common, out);
    if (*shoot_cmd) return cmd_shoot(common, shoot, out);
    if (*phase_cmd) return cmd_phase(common, out);
    if (*asym_cmd) return cmd_asymptote(common, out);
    if (*scale_cmd) return cmd_scale(common, scale, out);
    if (*verify_cmd) return cmd_verify(common, verify, out, err);
    if (*sweep_cmd) return cmd_sweep(common, sweep, out);
  } catch (const Error& e) {
    err << "biharm: " << e.what() << '\n';
    return is_validation(e.code()) ? kValidation : kNumeric;
  } catch (const std::exception& e) {
    err << "biharm: " << e.what() << '\n';
    return kNumeric;
  }
  return kValidation;
}

}  // namespace biharm::cli
