#include <gtest/gtest.h>

#include <cmath>

#include "biharm/oracles.hpp"
#include "biharm/radial_ode.hpp"

using namespace biharm;

namespace {

RadialState state(double r, double u, double du, double v, double dv) {
  RadialState s;
  s.r = r;
  s.u = u;
  s.du = du;
  s.v = v;
  s.dv = dv;
  return s;
}

}  // namespace

TEST(RadialField, UnitStateQ2) {
  const auto f = eval_radial_field(state(1, 1, 0, 2, 0), 2.0);
  EXPECT_DOUBLE_EQ(f[0], 0.0);
  EXPECT_DOUBLE_EQ(f[1], 2.0);
  EXPECT_DOUBLE_EQ(f[2], 0.0);
  EXPECT_DOUBLE_EQ(f[3], -1.0);
}

TEST(RadialField, UnitStateAnyQ) {
  for (double q : {1.1, 3.0, 7.0}) {
    const auto f = eval_radial_field(state(1, 1, 0, 0.37, 0), q);
    EXPECT_DOUBLE_EQ(f[1], 0.37);
    EXPECT_DOUBLE_EQ(f[3], -1.0);
  }
}

TEST(RadialField, MomentRows) {
  const auto f = eval_radial_field(state(2, 0.5, 0, 3, 0), 2.0);
  const double uq = 4.0;  // 0.5^-2
  EXPECT_DOUBLE_EQ(f[4], 2 * uq);
  EXPECT_DOUBLE_EQ(f[5], 4 * uq);
  EXPECT_DOUBLE_EQ(f[6], 8 * uq);
  EXPECT_DOUBLE_EQ(f[7], 16 * uq);
  EXPECT_DOUBLE_EQ(f[8], 6.0);
  EXPECT_DOUBLE_EQ(f[9], 12.0);
}

TEST(RadialField, MatchesExactQ7Derivatives) {
  // u = sqrt(s), s = 1 + a r², a = 1/sqrt(15):
  //   u'' = a s^{-3/2},  v'' = a² s^{-7/2} (4a²r⁴ + 14 a r² - 5).
  const auto ex = oracles::ExactSolution::entire_q7(true);
  const double a = 1.0 / std::sqrt(15.0);
  for (double r : {0.01, 0.3, 1.0, 7.0, 250.0}) {
    const auto v = ex.at(r);
    const double s = 1 + a * r * r;
    const double d2u = a * std::pow(s, -1.5);
    const double d2v = a * a * std::pow(s, -3.5) * (4 * a * a * r * r * r * r + 14 * a * r * r - 5);
    const auto f = eval_radial_field(state(r, v.u, v.du, v.v, v.dv), 7.0);
    EXPECT_NEAR(f[0], v.du, 1e-12 * std::abs(v.du));
    EXPECT_NEAR(f[1], d2u, 1e-12 * std::abs(d2u));
    EXPECT_NEAR(f[2], v.dv, 1e-12 * std::abs(v.dv));
    EXPECT_NEAR(f[3], d2v, 1e-12 * std::abs(d2v));
  }
}

TEST(RadialField, RejectsNonPositiveU) {
  try {
    (void)eval_radial_field(state(1, 0, 0, 1, 0), 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonPositiveU);
  }
  try {
    (void)eval_radial_field(state(0, 1, 0, 1, 0), 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ZeroRadius);
  }
}

TEST(SeriesStart, SmallRadiusLimit) {
  ProblemParams p;
  p.q = 2.0;
  p.beta = 1.0;
  const auto s = series_start(p, 1e-9);
  EXPECT_DOUBLE_EQ(s.u, 1.0);
  EXPECT_NEAR(s.du, 0.0, 1e-9);
  EXPECT_NEAR(s.v, 1.0, 1e-12);
  EXPECT_NEAR(s.dv, 0.0, 1e-9);
  for (double x : s.I) EXPECT_NEAR(x, 0.0, 1e-15);
  for (double x : s.J) EXPECT_NEAR(x, 0.0, 1e-15);
}

TEST(SeriesStart, LeadingTerm) {
  ProblemParams p;
  p.q = 2.0;
  p.beta = 1.0;
  p.r_seed = 1e-3;
  const auto s = series_start(p, 1e-3);
  EXPECT_NEAR(s.u, 1.0 + 1e-6 / 6.0, 1e-14);
}

TEST(SeriesStart, RepresentationAtSeed) {
  ProblemParams p;
  p.q = 3.0;
  p.beta = 2.0;
  const auto s = series_start(p, p.r_seed);
  const auto res = representation_residual(p, s);
  EXPECT_LT(std::abs(res.res_u), 1e-15);
  EXPECT_LT(std::abs(res.res_v), 1e-15);
}

TEST(SeriesStart, SeedTooLarge) {
  ProblemParams p;
  p.q = 2.0;
  p.beta = 1.0;
  p.r_seed = 0.5;
  try {
    (void)series_start(p, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SeedTooLarge);
  }
}

TEST(ProblemParams, Validation) {
  ProblemParams p;
  p.q = 0.9;
  EXPECT_THROW(p.validate(), Error);
  p.q = 2.0;
  p.beta = -1.0;
  EXPECT_THROW(p.validate(), Error);
  p.beta = 1.0;
  p.r_stop = p.r_seed / 2;
  EXPECT_THROW(p.validate(), Error);
}

TEST(Integrate, LargeBetaIsGlobal) {
  ProblemParams p;
  p.q = 2.0;
  p.beta = 10.0;
  const auto t = integrate(p);
  ASSERT_TRUE(is_global(t.classification));
  EXPECT_GT(std::get<Global>(t.classification).gamma, 0.0);
  EXPECT_DOUBLE_EQ(t.back().r, p.r_stop);
}

TEST(Integrate, TinyBetaBlowsDown) {
  ProblemParams p;
  p.q = 2.0;
  p.beta = 1e-4;
  const auto t = integrate(p);
  ASSERT_TRUE(is_blow_down(t.classification));
  const double rmax = std::get<BlowDown>(t.classification).r_max;
  EXPECT_TRUE(std::isfinite(rmax));
  EXPECT_LT(rmax, p.r_stop);
}

TEST(Integrate, SamplesIncreasingAndPositive) {
  ProblemParams p;
  p.q = 1.5;
  p.beta = 5.0;
  const auto t = integrate(p);
  for (std::size_t i = 1; i < t.samples.size(); ++i) {
    EXPECT_GT(t.samples[i].r, t.samples[i - 1].r);
    EXPECT_GT(t.samples[i].u, 0.0);
  }
}

TEST(Integrate, RepresentationDefect) {
  for (double beta : {0.3, 4.0}) {
    ProblemParams p;
    p.q = 2.0;
    p.beta = beta;
    const auto t = integrate(p);
    EXPECT_LE(max_representation_defect(t, false), 1e-8) << beta;
  }
}

TEST(Integrate, CorruptedMomentGivesExactResidual) {
  ProblemParams p;
  p.q = 2.0;
  p.beta = 4.0;
  p.r_stop = 100.0;
  auto t = integrate(p);
  const RadialState s = t.samples[t.samples.size() / 2];
  RadialState bad = s;
  bad.I[1] += 1.0;
  const auto a = representation_residual(p, s);
  const auto b = representation_residual(p, bad);
  EXPECT_NEAR(b.res_v - a.res_v, -1.0 / s.r, 1e-15 / s.r);
}

TEST(Integrate, TracksExactQ7) {
  const auto ex = oracles::ExactSolution::entire_q7(true);
  ProblemParams p;
  p.q = 7.0;
  p.beta = oracles::entire_q7_threshold();
  p.r_seed = 1e-3;
  p.r_stop = 1e3;
  const auto t = integrate_from(p, ex.state_at(1e-3));
  for (const auto& s : t.samples) EXPECT_NEAR(s.u / ex.at(s.r).u, 1.0, 1e-7);
}

TEST(TailLimit, DecayingPerturbation) {
  // v = γ0 + 1/r with the moments at zero: the corrected value tends to γ0.
  const double gamma0 = 0.25;
  double prev = INFINITY;
  for (double R : {1e2, 1e4, 1e6}) {
    RadialState s = state(R, R * R, 2 * R, gamma0 + 1.0 / R, -1.0 / (R * R));
    const double g = tail_corrected_limit(s, 2.0);
    EXPECT_LT(std::abs(g - gamma0), std::abs(prev - gamma0));
    prev = g;
  }
  EXPECT_NEAR(prev, gamma0, 1e-5);
}

TEST(QuadraticTail, ClosedForm) {
  EXPECT_DOUBLE_EQ(quadratic_tail(1, 10.0, 4.0, 2.0), 100.0 / 16.0 / 2.0);
  EXPECT_THROW((void)quadratic_tail(3, 10.0, 4.0, 2.0), Error);
}
