#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "biharm/serialization.hpp"
#include "biharm_cli/cli.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
  json report() const { return json::parse(out); }
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "biharm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = biharm::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "biharm_cli_tests";
  fs::create_directories(dir);
  const auto p = dir / name;
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Cli, SolveAboveThreshold) {
  const auto cache = scratch("solve_cache.json");
  const auto r = run({"solve", "--q", "2", "--beta-above-star", "1.0", "--r-stop", "1e5", "--cache", cache.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = r.report();
  EXPECT_EQ(j.at("classification").at("kind"), "Global");
  EXPECT_TRUE(j.at("asymptotics").at("consistency").at("pass").get<bool>());
  EXPECT_TRUE(j.at("config").contains("beta_star"));
  EXPECT_TRUE(fs::exists(cache));
}

TEST(Cli, SolveRejectsSmallQ) {
  const auto r = run({"solve", "--q", "0.9", "--beta", "1", "--no-cache"});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, SolveBlowDownWritesCsv) {
  const auto csv = scratch("blowdown.csv");
  const auto r = run({"solve", "--q", "7", "--beta", "0.5", "--no-cache", "--out", csv.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = r.report();
  EXPECT_EQ(j.at("classification").at("kind"), "BlowDown");
  EXPECT_TRUE(std::isfinite(j.at("classification").at("r_max").get<double>()));
  std::ifstream in(csv);
  const auto samples = biharm::read_trajectory_csv(in);
  EXPECT_EQ(samples.size(), j.at("samples").get<std::size_t>());
}

TEST(Cli, BetaFlagsExclusive) {
  EXPECT_EQ(run({"solve", "--q", "2", "--beta", "1", "--beta-above-star", "1", "--no-cache"}).code, 1);
  EXPECT_EQ(run({"solve", "--q", "2", "--no-cache"}).code, 1);
  EXPECT_EQ(run({"solve", "--q", "2", "--beta", "1", "--rtol", "-1", "--no-cache"}).code, 1);
  EXPECT_EQ(run({"bogus"}).code, 1);
}

TEST(Cli, ShootQ7AndCacheHit) {
  const auto cache = scratch("shoot_cache.json");
  const auto a = run({"shoot", "--q", "7", "--tol", "1e-6", "--cache", cache.string()});
  ASSERT_EQ(a.code, 0) << a.err;
  const json ja = a.report();
  EXPECT_FALSE(ja.at("cache_hit").get<bool>());
  EXPECT_NEAR(ja.at("beta_star").get<double>(), 3.0 / std::sqrt(15.0), 1e-4);

  const auto b = run({"shoot", "--q", "7", "--tol", "1e-6", "--cache", cache.string()});
  const json jb = b.report();
  EXPECT_TRUE(jb.at("cache_hit").get<bool>());
  EXPECT_FALSE(jb.contains("result"));
  EXPECT_EQ(jb.at("entry").at("timestamp"), ja.at("entry").at("timestamp"));
  EXPECT_EQ(jb.at("beta_star").get<double>(), ja.at("beta_star").get<double>());
}

TEST(Cli, ShootQ2Deterministic) {
  const auto a = run({"shoot", "--q", "2", "--tol", "1e-6", "--no-cache"});
  const auto b = run({"shoot", "--q", "2", "--tol", "1e-6", "--no-cache"});
  ASSERT_EQ(a.code, 0);
  const double x = a.report().at("beta_star").get<double>();
  EXPECT_GT(x, 0.0);
  EXPECT_EQ(x, b.report().at("beta_star").get<double>());
}

TEST(Cli, ShootBadBracketIsNumericFailure) {
  EXPECT_EQ(run({"shoot", "--q", "2", "--lo", "3", "--hi", "4", "--no-cache"}).code, 2);
}

TEST(Cli, PhaseCsv) {
  const auto csv = scratch("phase.csv");
  const auto r = run({"phase", "--q", "2", "--beta", "4", "--no-cache", "--out", csv.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t,x,y,z,w");
  EXPECT_LT(r.report().at("terminal_distance").at("p2").get<double>(), 0.01);
}

TEST(Cli, AsymptoteNeedsGlobal) {
  EXPECT_EQ(run({"asymptote", "--q", "2", "--beta", "0.5", "--no-cache"}).code, 2);
  const auto r = run({"asymptote", "--q", "2", "--beta", "4", "--no-cache"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.report().at("report").at("second_order").at("regime"), "q>3/2");
}

TEST(Cli, ScaleAndWitness) {
  const auto cache = scratch("scale_cache.json");
  const auto r = run({"scale", "--q", "2", "--beta-above-star", "1", "--target", "5", "--cache", cache.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(r.report().at("scaled_kappa_growth").at("value").get<double>(), 5.0, 5e-6);
  const auto w = run({"scale", "--q", "2", "--beta-above-star", "0.5", "--beta2", "4.5", "--target", "1", "--cache",
                      cache.string()});
  ASSERT_EQ(w.code, 0) << w.err;
  EXPECT_GT(w.report().at("witness").at("separation").get<double>(), 0.0);
  EXPECT_EQ(run({"scale", "--q", "2", "--beta", "1", "--beta2", "3", "--target", "1", "--cache", cache.string()}).code,
            1);
}

TEST(Cli, VerifySuites) {
  const auto report = scratch("verify.json");
  const auto a = run({"verify", "--suite", "fixed-points", "--q-list", "1.25,1.5,2,3,7", "--no-cache", "--report",
                      report.string()});
  ASSERT_EQ(a.code, 0) << a.err;
  const json j = a.report();
  EXPECT_EQ(j.at("records").size(), 5u);
  for (const auto& rec : j.at("records")) EXPECT_LT(rec.at("measured").get<double>(), 1e-12);
  EXPECT_TRUE(j.contains("version"));
  EXPECT_EQ(j.at("config").at("q_list").size(), 5u);
  std::ifstream in(report);
  EXPECT_EQ(json::parse(in), j);

  const auto e = run({"verify", "--suite", "eigen", "--q-list", "2,7", "--no-cache"});
  EXPECT_EQ(e.code, 0);
  const auto k = run({"verify", "--suite", "kappa-identity", "--q-list", "2", "--no-cache"});
  EXPECT_EQ(k.code, 0);
  EXPECT_LE(k.report().at("records")[0].at("measured").get<double>(), 1e-4);
}

TEST(Cli, VerifyValidation) {
  EXPECT_EQ(run({"verify", "--suite", "nope"}).code, 1);
  EXPECT_EQ(run({"verify", "--suite", "eigen", "--q-list", "1"}).code, 1);
}

TEST(Cli, Sweep) {
  const auto dir = scratch("sweep");
  const auto cache = scratch("sweep_cache.json");
  const auto r = run({"sweep", "--q-list", "2,7", "--offsets", "-0.5,1", "--r-stop", "1e4", "--cache", cache.string(),
                      "--out", dir.string(), "--jobs", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = r.report();
  ASSERT_EQ(j.at("results").size(), 4u);
  EXPECT_EQ(j.at("results")[0].at("classification").at("kind"), "BlowDown");
  EXPECT_EQ(j.at("results")[1].at("classification").at("kind"), "Global");
  for (const auto& res : j.at("results")) EXPECT_TRUE(fs::exists(dir / res.at("csv").get<std::string>()));
  EXPECT_EQ(run({"sweep", "--q-list", "2", "--no-cache"}).code, 1);
}
