#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "biharm/oracles.hpp"
#include "biharm/shooting.hpp"

using namespace biharm;

namespace {

// Frozen from a bisection run at tol 1e-6, horizon 1e5, default controls.
constexpr double kBetaStarQ2 = 2.0053973197937012;

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "biharm_tests";
  std::filesystem::create_directories(dir);
  auto p = dir / name;
  std::filesystem::remove(p);
  return p;
}

}  // namespace

TEST(Classify, AroundQ7Threshold) {
  const double star = oracles::entire_q7_threshold();
  EXPECT_TRUE(is_global(classify_beta(7.0, star + 0.1)));
  EXPECT_TRUE(is_blow_down(classify_beta(7.0, star - 0.1)));
  EXPECT_TRUE(is_global(classify_beta(2.0, 10.0)));
}

TEST(Classify, GlobalSideOnlyForGlobal) {
  EXPECT_TRUE(global_side(Global{0.1}));
  EXPECT_FALSE(global_side(BlowDown{1.0, true}));
  EXPECT_FALSE(global_side(Undetermined{}));
}

TEST(Shooting, Q7ClosedForm) {
  const auto res = find_beta_star(7.0, std::nullopt, 1e-6);
  EXPECT_NEAR(res.beta_star, 3.0 / std::sqrt(15.0), 1e-4);
  EXPECT_LE(res.beta_hi - res.beta_lo, 1e-6);
  EXPECT_GE(res.gamma_at_bracket, 0.0);
}

TEST(Shooting, Q2RegressionAndDeterminism) {
  const auto a = find_beta_star(2.0, std::nullopt, 1e-6);
  const auto b = find_beta_star(2.0, std::nullopt, 1e-6);
  EXPECT_GT(a.beta_star, 0.0);
  EXPECT_EQ(a.beta_star, b.beta_star);
  EXPECT_EQ(a.beta_lo, b.beta_lo);
  EXPECT_NEAR(a.beta_star, kBetaStarQ2, 1e-9);
}

TEST(Shooting, ExplicitBracket) {
  const auto res = find_beta_star(2.0, Bracket{1.0, 4.0}, 1e-4);
  EXPECT_NEAR(res.beta_star, kBetaStarQ2, 1e-4);
}

TEST(Shooting, BadBracketRejected) {
  try {
    (void)find_beta_star(2.0, Bracket{3.0, 4.0}, 1e-4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NoBracket);
  }
}

TEST(Shooting, GammaShrinksWithTolerance) {
  double prev = INFINITY;
  for (double tol : {1e-2, 1e-4, 1e-6}) {
    const auto res = find_beta_star(2.0, std::nullopt, tol);
    EXPECT_LT(res.gamma_at_bracket, prev);
    EXPECT_GE(res.gamma_at_bracket, 0.0);
    prev = res.gamma_at_bracket;
  }
}

TEST(AutoBracket, Straddles) {
  const auto b = auto_bracket(1.5);
  EXPECT_LT(b.lo, b.hi);
  EXPECT_FALSE(global_side(classify_beta(1.5, b.lo)));
  EXPECT_TRUE(global_side(classify_beta(1.5, b.hi)));
}

TEST(GammaLimit, ThresholdSolutionQ7) {
  const auto ex = oracles::ExactSolution::entire_q7(true);
  ProblemParams p;
  p.q = 7.0;
  p.beta = oracles::entire_q7_threshold();
  p.r_seed = 1e-3;
  p.r_stop = 1e5;
  const auto t = integrate_from(p, ex.state_at(1e-3));
  ASSERT_TRUE(is_global(t.classification));
  EXPECT_NEAR(gamma_limit(t).corrected, 0.0, 1e-6);
}

TEST(GammaLimit, RequiresGlobal) {
  ProblemParams p;
  p.q = 2.0;
  p.beta = 0.5;
  const auto t = integrate(p);
  try {
    (void)gamma_limit(t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotGlobal);
  }
}

TEST(CanonicalQ, ShortestRoundTrip) {
  EXPECT_EQ(canonical_q(2.0), "2");
  EXPECT_EQ(canonical_q(1.25), "1.25");
  EXPECT_EQ(canonical_q(0.1 + 0.2), "0.30000000000000004");
}

TEST(Cache, HitMissAndPersistence) {
  const auto path = temp_file("cache.json");
  BetaStarCache cache(path);
  const auto first = resolve_beta_star(7.0, 1e-4, &cache);
  EXPECT_FALSE(first.cache_hit);
  ASSERT_TRUE(first.computed.has_value());
  cache.save();

  BetaStarCache reloaded(path);
  const auto second = resolve_beta_star(7.0, 1e-4, &reloaded);
  EXPECT_TRUE(second.cache_hit);
  EXPECT_FALSE(second.computed.has_value());
  EXPECT_EQ(second.entry.timestamp, first.entry.timestamp);
  EXPECT_EQ(second.entry.beta_lo, first.entry.beta_lo);

  // Looser requests reuse the entry, tighter ones and other horizons do not.
  EXPECT_TRUE(reloaded.lookup(7.0, 1e-3, 1e5).has_value());
  EXPECT_FALSE(reloaded.lookup(7.0, 1e-6, 1e5).has_value());
  EXPECT_FALSE(reloaded.lookup(7.0, 1e-4, 1e6).has_value());
  EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
}

TEST(Cache, CorruptFileRejected) {
  const auto path = temp_file("corrupt.json");
  std::ofstream(path) << "{not json";
  EXPECT_THROW(BetaStarCache{path}, Error);
}
