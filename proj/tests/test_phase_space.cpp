#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "biharm/oracles.hpp"
#include "biharm/phase_space.hpp"
#include "biharm/shooting.hpp"

using namespace biharm;

namespace {

const std::vector<double> kQGrid{1.1, 1.25, 1.5, 2.0, 3.0, 7.0, 10.0};

double max_abs(const Vec4& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

Vec4 point(const CriticalPointSet& s, const std::string& name) {
  for (const auto& p : s.points)
    if (p.name == name) return p.point;
  ADD_FAILURE() << "no point " << name;
  return {};
}

std::array<Complex, 4> eigen_reference(const Mat4& m) {
  Eigen::Matrix4d a;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a(i, j) = m[i][j];
  Eigen::EigenSolver<Eigen::Matrix4d> es(a);
  std::array<Complex, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = es.eigenvalues()(i);
  return out;
}

}  // namespace

TEST(PhaseField, KnownPoints) {
  EXPECT_EQ(max_abs(phase_field(Vec4{0, 0, 0, 0}, 2.0)), 0.0);
  for (double q : kQGrid) {
    EXPECT_EQ(max_abs(phase_field(Vec4{2, 0, 6, 0}, q)), 0.0);
    EXPECT_EQ(max_abs(phase_field(Vec4{1, -1, 2, 0}, q)), 0.0);
  }
}

TEST(FixedPoints, AllAreEquilibria) {
  for (double q : kQGrid) {
    const auto s = fixed_points(q);
    for (const auto& p : s.points) EXPECT_LT(max_abs(phase_field(p.point, q)), 1e-12) << q << ' ' << p.name;
  }
}

TEST(FixedPoints, ListedValues) {
  const auto s7 = fixed_points(7.0);
  EXPECT_DOUBLE_EQ(s7.a, 0.5);
  const Vec4 p3 = point(s7, "p3");
  EXPECT_DOUBLE_EQ(p3[0], 0.5);
  EXPECT_DOUBLE_EQ(p3[1], -1.5);
  EXPECT_DOUBLE_EQ(p3[2], 0.75);
  EXPECT_DOUBLE_EQ(p3[3], -0.75);
  EXPECT_EQ(point(s7, "p4"), (Vec4{0, 2, 0, -6}));
  EXPECT_EQ(point(s7, "p8"), (Vec4{-1, 9, 0, -90}));
  EXPECT_EQ(point(fixed_points(1.5), "p2"), (Vec4{2, 0, 6, 0}));
  EXPECT_THROW((void)fixed_points(1.0), Error);
}

TEST(Jacobian, AtP2) {
  // The field's w-row derivative is 2 - qx - y, which is 2 - 2q at p2.
  for (double q : {2.0, 7.0}) {
    const Mat4 j = jacobian({2, 0, 6, 0}, q);
    const Mat4 expected{{{-5, 0, 1, 0}, {0, -1, 0, -1}, {-6, 6, 0, 0}, {0, 0, 0, 2 - 2 * q}}};
    EXPECT_EQ(j, expected);
  }
}

TEST(Jacobian, AtOrigin) {
  const Mat4 expected{{{-1, 0, 1, 0}, {0, -1, 0, -1}, {0, 0, 2, 0}, {0, 0, 0, 2}}};
  EXPECT_EQ(jacobian({0, 0, 0, 0}, 3.0), expected);
}

TEST(Jacobian, CentralDifferences) {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  std::uniform_real_distribution<double> qdist(1.05, 10.0);
  const double eps = 1e-6;
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    const Vec4 p{dist(rng), dist(rng), dist(rng), dist(rng)};
    const double q = qdist(rng);
    const Mat4 j = jacobian(p, q);
    for (int c = 0; c < 4; ++c) {
      Vec4 a = p, b = p;
      a[c] += eps;
      b[c] -= eps;
      const Vec4 fa = phase_field(a, q), fb = phase_field(b, q);
      for (int r = 0; r < 4; ++r) worst = std::max(worst, std::abs((fa[r] - fb[r]) / (2 * eps) - j[r][c]));
    }
  }
  EXPECT_LT(worst, 1e-7);
}

TEST(Eigenvalues, SpectrumAtP2) {
  for (double q : kQGrid) {
    const auto ev = eigenvalues(jacobian({2, 0, 6, 0}, q));
    const std::array<Complex, 4> expected{-1.0, -2.0, -3.0, 2.0 - 2.0 * q};
    EXPECT_LE(multiset_distance(ev, expected), 1e-9) << q;
  }
}

TEST(Eigenvalues, SortedAndDegenerate) {
  const auto ev = eigenvalues(jacobian({2, 0, 6, 0}, 2.0));
  const std::array<Complex, 4> expected{-3.0, -2.0, -2.0, -1.0};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(ev[i].real(), expected[i].real(), 1e-9);
    EXPECT_EQ(ev[i].imag(), 0.0);
  }
  const auto e7 = eigenvalues(jacobian({2, 0, 6, 0}, 7.0));
  EXPECT_NEAR(e7[0].real(), -12.0, 1e-12);
}

TEST(Eigenvalues, Identity) {
  Mat4 id{};
  for (int i = 0; i < 4; ++i) id[i][i] = 1.0;
  for (const auto& e : eigenvalues(id)) EXPECT_NEAR(std::abs(e - 1.0), 0.0, 1e-9);
}

TEST(Eigenvalues, MatchEigenSolverEverywhere) {
  for (double q : kQGrid) {
    for (const auto& p : fixed_points(q).points) {
      const Mat4 j = jacobian(p.point, q);
      double scale = 1.0;
      for (const auto& row : j)
        for (double x : row) scale = std::max(scale, std::abs(x));
      EXPECT_LE(multiset_distance(eigenvalues(j), eigen_reference(j)), 1e-8 * scale) << q << ' ' << p.name;
    }
  }
}

TEST(Eigenvalues, ComplexPair) {
  const Mat4 rot{{{0, -1, 0, 0}, {1, 0, 0, 0}, {0, 0, 2, 0}, {0, 0, 0, 3}}};
  const std::array<Complex, 4> expected{Complex(0, -1), Complex(0, 1), 2.0, 3.0};
  EXPECT_LE(multiset_distance(eigenvalues(rot), expected), 1e-12);
}

TEST(CharacteristicPolynomial, Diagonal) {
  const Mat4 d{{{1, 0, 0, 0}, {0, 2, 0, 0}, {0, 0, 3, 0}, {0, 0, 0, 4}}};
  const auto c = characteristic_polynomial(d);
  EXPECT_DOUBLE_EQ(c[3], -10.0);
  EXPECT_DOUBLE_EQ(c[2], 35.0);
  EXPECT_DOUBLE_EQ(c[1], -50.0);
  EXPECT_DOUBLE_EQ(c[0], 24.0);
}

TEST(ToPhase, LinearGrowthLimitIsP1) {
  // u = sqrt(1 + r²) (up to scale) at large r.
  const double r = 1e6;
  const auto ex = oracles::exact_entire_q7(r, false);
  RadialState s;
  s.r = r;
  s.u = ex.u;
  s.du = ex.du;
  s.v = ex.v;
  s.dv = ex.dv;
  const auto p = to_phase(s, 7.0);
  EXPECT_LT(distance(p, Vec4{1, -1, 2, 0}), 1e-6);
}

TEST(ToPhase, DegenerateAndInvalid) {
  RadialState s;
  s.r = 1.0;
  s.u = 1.0;
  s.v = 0.0;
  try {
    (void)to_phase(s, 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegenerateState);
  }
  s.v = 1.0;
  s.u = -1.0;
  EXPECT_THROW((void)to_phase(s, 2.0), Error);
}

TEST(ToPhase, RoundTrip) {
  ProblemParams p;
  p.q = 2.0;
  p.beta = 3.0;
  const auto t = integrate(p);
  for (const auto& s : t.samples) {
    const auto back = from_phase(to_phase(s, p.q), s.u);
    EXPECT_NEAR(back.r, s.r, 1e-12 * s.r);
    EXPECT_NEAR(back.du, s.du, 1e-12 * (std::abs(s.du) + 1e-300));
    EXPECT_NEAR(back.v, s.v, 1e-12 * std::abs(s.v));
    EXPECT_NEAR(back.dv, s.dv, 1e-12 * (std::abs(s.dv) + 1e-300));
  }
}

TEST(PhaseTrajectory, SingularPowerIsConstantP3) {
  const double q = 2.0;
  const Vec4 p3 = fixed_points(q).points[3].point;
  std::vector<RadialState> samples;
  for (int k = 0; k < 60; ++k) {
    const double r = std::pow(10.0, -2.0 + 0.1 * k);
    const auto v = oracles::exact_singular_power(q, r);
    RadialState s;
    s.r = r;
    s.u = v.u;
    s.du = v.du;
    s.v = v.v;
    s.dv = v.dv;
    samples.push_back(s);
  }
  const auto path = phase_trajectory(samples, q);
  for (const auto& pt : path.points) EXPECT_LT(distance(pt, p3), 1e-12);
  EXPECT_LT(path.residual, 1e-10);
}

TEST(PhaseTrajectory, GlobalApproachesP2) {
  ProblemParams p;
  p.q = 2.0;
  p.beta = 4.0;
  p.r_stop = 1e6;
  const auto path = phase_trajectory(integrate(p), p.q);
  // Once inside the 0.05 ball it stays there.
  const Vec4 p2{2, 0, 6, 0};
  auto it = std::find_if(path.points.begin(), path.points.end(), [&](const PhasePoint& x) { return distance(x, p2) < 0.05; });
  ASSERT_NE(it, path.points.end());
  for (; it != path.points.end(); ++it) EXPECT_LT(distance(*it, p2), 0.05);
}

TEST(PhaseTrajectory, ResidualShrinksWithSampling) {
  ProblemParams p;
  p.q = 2.0;
  p.beta = 4.0;
  p.r_stop = 1e3;
  Controls coarse, fine;
  coarse.samples_per_decade = 40;
  fine.samples_per_decade = 160;
  const double a = phase_trajectory(integrate(p, coarse), p.q).residual;
  const double b = phase_trajectory(integrate(p, fine), p.q).residual;
  EXPECT_NEAR(a / b, 16.0, 3.0);
}
