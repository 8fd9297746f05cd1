#include <gtest/gtest.h>

#include <bhdata/schwarzschild.hpp>

using namespace bhdata;

namespace {

double max_abs_R(const SchwarzschildProfile& P, double hi, int count) {
  double m = 0;
  for (int i = 0; i <= count; ++i) m = std::max(m, std::abs(warped_line_curvature(P.n, P(hi * i / count))));
  return m;
}

}  // namespace

TEST(Schwarzschild, HorizonData) {
  for (int n : {3, 4}) {
    const auto P = solve_profile(0.5, n, 50);
    EXPECT_DOUBLE_EQ(P.r0, 1.0);
    EXPECT_DOUBLE_EQ(P(0).f, 1.0);
    EXPECT_EQ(P(0).d1, 0.0);
    EXPECT_GT(P(P.hi()).d1, 0.999);
  }
}

TEST(Schwarzschild, Residuals) {
  const auto P = solve_profile(1.0, 3, 100);
  EXPECT_LT(P.max_residual_c, 1e-10);
  EXPECT_LT(P.max_residual_d, 1e-9);
}

TEST(Schwarzschild, ScalarFlat) {
  for (auto [n, m] : {std::pair{3, 0.5}, {3, 1.0}, {4, 0.5}, {5, 1.0}}) {
    const auto P = solve_profile(m, n, 50 * std::pow(2 * m, 1.0 / (n - 1)));
    EXPECT_LT(max_abs_R(P, P.hi(), 20000), 1e-6) << n << " " << m;
  }
}

TEST(Schwarzschild, SeriesNearHorizon) {
  const auto P = solve_profile(0.5, 3, 10);
  for (double s : {1e-3, 5e-3, 1e-2}) EXPECT_NEAR(P(s).f, P.series(s), 0.5 * s * s * s * s + 1e-14);  // next term is O(s^4)
}

TEST(Schwarzschild, Homothety) {
  // u_{lambda^{n-1} m}(lambda s) = lambda u_m(s)
  const double lam = 2;
  const auto P = solve_profile(0.5, 3, 20), Q = solve_profile(0.5 * lam * lam, 3, 40);
  double err = 0;
  for (int i = 0; i <= 200; ++i) {
    const double s = 20.0 * i / 200;
    err = std::max(err, std::abs(Q(lam * s).f - lam * P(s).f));
  }
  EXPECT_LT(err, 1e-8);
}

TEST(Schwarzschild, MisnerSharpMass) {
  const auto P = solve_profile(0.7, 4, 30);
  for (double s : {0.0, 1.0, 10.0, 29.0}) EXPECT_NEAR(P.mass_at(s), 0.7, 1e-9);
}

TEST(Schwarzschild, RejectsBadInput) {
  try {
    solve_profile(-1, 3, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::HypothesisViolated);
  }
}

class Bend : public ::testing::Test {
 protected:
  std::shared_ptr<const SchwarzschildProfile> base =
      std::make_shared<const SchwarzschildProfile>(solve_profile(0.5, 3, default_s_max(0.5, 3)));
};

TEST_F(Bend, SigmaFixesBendPoint) {
  const BentProfile b = bend_search(base, 0.5);
  EXPECT_LE(b.delta(), 0.25);
  EXPECT_DOUBLE_EQ(b.sigma(0.5).f, 0.5);
  EXPECT_NEAR(b.sigma(0.5 - 1e-9).f, 0.5 - 1e-9, 1e-15);
  EXPECT_GE(b.sigma(b.lo()).f, 0.0);
  EXPECT_GT(b.closure_constant(), -1e-12);
}

TEST_F(Bend, CurvatureFactorization) {
  // R(u o sigma) = n u^{-2} E B, with u scalar flat
  const BentProfile b = bend_search(base, 0.5);
  const RadialProfile f = b.profile();
  for (double x : {0.1, 0.3, 0.5, 0.7}) {
    const double s = b.lo() + x * b.delta();
    const double u = (*base)(b.sigma(s).f).f;
    const double expected = 3 / (u * u) * b.inequality_lhs(s);
    EXPECT_NEAR(warped_line_curvature(3, f(s)), expected, 1e-8 * std::max(1.0, std::abs(expected))) << s;
  }
}

TEST_F(Bend, VerifiedPositive) {
  const BentProfile b = bend_search(base, 0.5);
  const BentReport r = verify_bent_psc(b);
  EXPECT_TRUE(r.pass);
  EXPECT_GT(r.min_R_resolved, 0);
  EXPECT_LT(r.max_abs_R_flat, 1e-8);
  EXPECT_EQ(r.failed, 0);
}

TEST_F(Bend, WideDeltaFails) {
  // delta = s0 pushes sigma below zero or breaks the inequality
  try {
    bend(base, 0.5, 0.49, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PositivityFailed);
  }
}

TEST_F(Bend, ExactBeyondBendPoint) {
  const BentProfile b = bend_search(base, 0.5);
  for (double s : {0.5, 1.0, 7.0}) {
    const Jet x = b(s), y = (*base)(s);
    EXPECT_EQ(x.f, y.f);
    EXPECT_EQ(x.d1, y.d1);
  }
}
