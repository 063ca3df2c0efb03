// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "biharm/serialization.hpp"
#include "biharm/verification.hpp"
#include "biharm_cli/cli.hpp"

using namespace biharm;

namespace {

struct Criterion {
  std::string title;
  std::vector<std::string> suites;
  double max_seconds_per_record = INFINITY;
  double max_seconds_total = INFINITY;
};

std::string brief(const VerifyRecord& r) {
  std::ostringstream s;
  s << r.suite << '/' << r.check << "(q=" << r.q << ") measured " << format_double(r.measured);
  return s.str();
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();

  // Criterion 1 goes through the command line exactly as a user would run it.
  const char* shoot_argv[] = {"biharm", "shoot", "--q", "7", "--tol", "1e-6", "--no-cache"};
  std::ostringstream shoot_out, shoot_err;
  const auto s0 = std::chrono::steady_clock::now();
  const int shoot_code = cli::run(7, shoot_argv, shoot_out, shoot_err);
  const double shoot_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - s0).count();
  double shoot_beta = NAN;
  if (shoot_code == 0) shoot_beta = nlohmann::json::parse(shoot_out.str()).at("beta_star").get<double>();

  const VerifyReport rep = run_verify(VerifyConfig{});

  const std::vector<Criterion> criteria{
      {"threshold oracle q=7 (cli shoot, tol 1e-6, |err| <= 1e-4, < 60 s)", {"threshold"}},
      {"exact-solution tracking q=7 (rel <= 1e-7 to r=1e3, < 5 s)", {"tracking"}},
      {"fixed points are equilibria (< 1e-12, < 1 s)", {"fixed-points"}, INFINITY, 1.0},
      {"spectrum at p2 is {-1,-2,-3,2-2q} (<= 1e-9, < 1 s)", {"eigen"}, INFINITY, 1.0},
      {"growth-constant routes agree (1e-3, 1e-4 for q >= 2, < 30 s each)", {"kappa-identity"}, 30.0},
      {"gamma at the global bracket end decreases with tol (< 2 min)", {"gamma-probe"}, INFINITY, 120.0},
      {"second order q=2: half-factor within 1%, no-half alternative off by 2", {"second-order-linear"}},
      {"second order q=3/2: log ratio within 10%", {"second-order-log"}},
      {"second order q=5/4: power ratio within 10%, chi vs quadrature 1e-10", {"second-order-power"}},
      {"decay rates toward p2 and the resonant t e^-t profile", {"rates"}},
      {"scaling to growth 5 and the distinct-pair witness", {"scaling"}},
      {"representation identities on every suite trajectory (<= 100 rtol)", {"representation"}},
      {"singular power solution: FD order 2, phase image p3 to 1e-12", {"singular-power"}},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    bool pass = true;
    std::size_t count = 0;
    double total = 0.0;
    std::string detail;
    for (const auto& r : rep.records) {
      if (std::find(c.suites.begin(), c.suites.end(), r.suite) == c.suites.end()) continue;
      ++count;
      total += r.seconds;
      if (!r.pass || r.seconds > c.max_seconds_per_record) {
        pass = false;
        if (detail.empty()) detail = "first failure: " + brief(r) + (r.note.empty() ? "" : " [" + r.note + "]");
      }
    }
    if (count == 0) pass = false;
    if (total > c.max_seconds_total) {
      pass = false;
      detail = "runtime " + format_double(total) + " s";
    }
    if (i == 0) {
      const bool cli_ok = shoot_code == 0 && std::abs(shoot_beta - 3.0 / std::sqrt(15.0)) <= 1e-4 && shoot_seconds < 60.0;
      pass = pass && cli_ok;
      detail = "cli beta_star " + format_double(shoot_beta) + " in " + format_double(shoot_seconds) + " s" +
               (detail.empty() ? "" : "; " + detail);
    }
    if (!pass) ++failed;
    std::printf("[%2zu] %s  %s  (checks: %zu, %.2f s)%s%s\n", i + 1, pass ? "PASS" : "FAIL", c.title.c_str(), count,
                total, detail.empty() ? "" : "  ", detail.c_str());
  }

  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d of %zu criteria failed; %zu/%zu checks passed; total %.2f s (target < 600 s)\n", failed,
              criteria.size(), rep.passed, rep.records.size(), elapsed);
  return failed == 0 && elapsed < 600.0 ? 0 : 1;
}
