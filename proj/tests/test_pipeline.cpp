#include <gtest/gtest.h>

#include <bhdata/io.hpp>
#include <bhdata/pipeline.hpp>

using namespace bhdata;
using std::numbers::pi;

namespace {

BuildConfig round_config(double mass = 0.55) {
  BuildConfig c;
  c.n = 3;
  c.coefficients = {1.0};
  c.mass = mass;
  c.angular = 32;
  c.path_samples = 33;
  return c;
}

const BuildResult& round_build() {
  static const BuildResult b = build(round_config());
  return b;
}

}  // namespace

TEST(Threshold, UnitSphere) {
  EXPECT_NEAR(threshold_mass(2 * pi * pi, 3), 0.5, 1e-15);
  EXPECT_NEAR(threshold_mass(8 * pi * pi / 3, 4), 0.5, 1e-15);
}

TEST(Threshold, Homogeneity) {
  // volume lambda^n omega_n has threshold lambda^{n-1} / 2
  for (int n : {3, 4, 5}) {
    const double lam = 1.7;
    EXPECT_NEAR(threshold_mass(std::pow(lam, n) * sphere_volume(n), n), 0.5 * std::pow(lam, n - 1), 1e-13);
  }
}

TEST(Threshold, HorizonRadius) {
  // r0 = (2m)^{1/(n-1)}
  EXPECT_NEAR(std::pow(2 * 0.55, 0.5), 1.0488088481701516, 1e-15);
}

TEST(Matching, SolveEps) {
  const auto e = solve_eps(1, 20, 0.01);
  ASSERT_TRUE(e.has_value());
  EXPECT_NEAR(neck_slope(1, 20, *e), 0.01, 1e-13);
  // eps / sqrt(1 + eps) = 0.2 -> eps = (0.04 + sqrt(0.0016 + 0.16)) / 2
  EXPECT_NEAR(*e, (0.04 + std::sqrt(0.0016 + 0.16)) / 2, 1e-11);  // bisection stops on the slope
  EXPECT_FALSE(solve_eps(1, 20, 1.0).has_value());
  EXPECT_FALSE(solve_eps(1, 20, -0.1).has_value());
}

TEST(Build, RoundSphere) {
  const BuildResult& b = round_build();
  const VerificationReport& r = b.report;
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.penrose_ratio, 1.1, 1e-12);
  EXPECT_EQ(r.adm_mass, 0.55);
  EXPECT_LT(r.boundary_H, 1e-8);
  EXPECT_LT(r.boundary_isometry, 1e-10);
  EXPECT_TRUE(r.joints_ok);
  EXPECT_NEAR(b.composite.rho, 1.0, 1e-12);
  // bent and tail reach the scalar-flat exterior; their checks live in the bend verifier
  for (const auto& s : r.segments)
    if (s.name != "tail" && s.name != "bent") EXPECT_GT(s.min_R, 0) << s.name;
}

TEST(Build, BelowThresholdFails) {
  try {
    build(round_config(0.999 * 0.5));
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MatchingFailed);
  }
}

TEST(Build, NonPSCInputRejected) {
  BuildConfig c = round_config();
  c.coefficients = {1.0, 0.3};
  c.angular = 64;
  c.mass.reset();
  c.mass_ratio = 1.05;
  try {
    build(c);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InputNotPSC);
  }
}

TEST(Composite, JsonRoundTripVerifies) {
  const BuildResult& b = round_build();
  const json j = composite_to_json(b.composite);
  const CompositeMetric back = composite_from_json(json::parse(j.dump()));
  const VerificationReport r = verify(back);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.adm_mass, b.report.adm_mass);
  EXPECT_EQ(composite_to_json(back).dump(), j.dump());
}

TEST(Composite, TamperedTailFails) {
  CompositeMetric c = round_build().composite;
  c.tail_mass *= 1.001;
  const VerificationReport r = verify(c);
  EXPECT_FALSE(r.joints_ok);
  EXPECT_FALSE(r.clause_schwarzschild);
  EXPECT_FALSE(r.pass);
}

TEST(Composite, Deterministic) {
  const BuildResult again = build(round_config());
  EXPECT_EQ(composite_to_json(again.composite).dump(), composite_to_json(round_build().composite).dump());
}
