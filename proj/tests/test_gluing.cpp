#include <gtest/gtest.h>

#include <bhdata/pipeline.hpp>

using namespace bhdata;

namespace {

// Neck of the unit round collar against the bent m = 0.55 horizon piece.
struct Pair {
  double A = 0, eps = 0;
  MatchResult match;
  GlueInput in;
};

const Pair& reference_pair() {
  static const Pair p = [] {
    Pair r;
    MetricPath path;
    path.grid = AngularGrid::make(3, 32);
    path.t = t_samples(5);
    for (int k = 0; k < 5; ++k) path.s.push_back(PathSample::still(AxiMetric::round(path.grid)));
    r.A = find_A(path, 1.0).A;
    r.match = match_parameters(0.55, 3, r.A, 1.0);
    r.eps = r.match.eps;
    r.in = {neck_profile(1.0, r.eps, r.A, 3, r.A / 2, r.A), glue_piece(*r.match.bent), 3};
    return r;
  }();
  return p;
}

const GlueResult& reference_glue() {
  static const GlueResult g = glue(reference_pair().in);
  return g;
}

}  // namespace

TEST(Omega, Examples) {
  EXPECT_NEAR(omega(3, Jet{2.0, 0.0, 0.0}), 0.5, 1e-15);
  EXPECT_NEAR(omega(4, Jet{1.0, 0.5, 7.0}), 1.125, 1e-15);
  EXPECT_NEAR(omega(3, Jet{1.0, 1.0, 0.0}), 0.0, 1e-15);
  // R > 0 exactly when f'' < Omega[f]
  for (const Jet j : {Jet{1.0, 0.3, 0.2}, Jet{1.0, 0.3, 0.5}, Jet{2.0, 0.9, -0.1}})
    EXPECT_EQ(warped_line_curvature(3, j) > 0, j.d2 < omega(3, j));
}

TEST(Omega, SchwarzschildIsCritical) {
  const auto u = solve_profile(0.55, 3, 30);
  for (double s : {0.01, 0.3, 1.0, 5.0, 29.0}) {
    const Jet j = u(s);
    EXPECT_LT(std::abs(omega(3, j) - j.d2), 1e-8) << s;
  }
}

TEST(Gluing, TranslateClosesTheGap) {
  const GlueInput t = translate_intervals(reference_pair().in);
  const Jet e1 = t.f1(t.f1.hi()), e2 = t.f2(t.f2.lo());
  EXPECT_GT(t.f2.lo(), t.f1.hi());
  EXPECT_NEAR(e1.f + e1.d1 * (t.f2.lo() - t.f1.hi()), e2.f, 1e-12);
  EXPECT_NEAR(e1.d1, e2.d1, 1e-10);
  EXPECT_EQ(glue_hypotheses(reference_pair().in), "");
}

TEST(Gluing, ResultIsPSC) {
  const GlueResult& g = reference_glue();
  EXPECT_GT(g.nu, 0);
  EXPECT_GE(g.margin, g.d);
  EXPECT_GT(g.min_R, 0);
  // independent recheck on four times the structured points
  const Cutoff eta{g.m1, g.translated.f1.hi(), g.translated.f2.lo(), g.m2, g.delta_cut};
  const GlueScan s = glue_scan(g.f, glue_check_points(eta, g.nu, 4 * 1600));
  EXPECT_GT(s.margin, 0);
  EXPECT_GT(s.min_slope, 0);
  EXPECT_GT(s.min_R, 0);
  // and on a plain uniform grid across the whole glued interval
  double minR = INFINITY;
  for (int i = 0; i <= 20000; ++i) minR = std::min(minR, warped_line_curvature(3, g.f(g.f.lo() + (g.f.hi() - g.f.lo()) * i / 20000)));
  EXPECT_GT(minR, 0);
}

TEST(Gluing, EndsExact) {
  const GlueResult& g = reference_glue();
  for (int i = 0; i <= 50; ++i) {
    const double s = g.f.lo() + (g.m1 - g.f.lo()) * i / 50;
    const Jet a = g.f(s), b = g.translated.f1(s);
    EXPECT_EQ(a.f, b.f);
    EXPECT_EQ(a.d1, b.d1);
    EXPECT_EQ(a.d2, b.d2);
    const double r = g.m2 + (g.f.hi() - g.m2) * i / 50;
    const Jet c = g.f(r), d = g.translated.f2(r);
    EXPECT_EQ(c.f, d.f);
    EXPECT_EQ(c.d1, d.d1);
    EXPECT_EQ(c.d2, d.d2);
  }
}

TEST(Gluing, LinearRegionIdentity) {
  // away from both corners the bump sees only the bridging line
  const GlueResult& g = reference_glue();
  const auto bridged = std::make_shared<const BridgedProfile>(g.translated);
  const double b1 = bridged->b1(), a2 = bridged->a2();
  const Cutoff eta{g.m1, b1, a2, g.m2, g.delta_cut};
  const double nu = (a2 - b1) / 8;
  const MollifiedProfile m(bridged, eta, nu);
  for (double x : {0.3, 0.5, 0.7}) {
    const double s = b1 + x * (a2 - b1);
    EXPECT_NEAR(m(s).f, (*bridged)(s).f, 1e-12);
    EXPECT_NEAR(m(s).d1, (*bridged)(s).d1, 1e-12);
  }
}

TEST(Gluing, ConvergesAsRadiusShrinks) {
  const GlueResult& g = reference_glue();
  const auto bridged = std::make_shared<const BridgedProfile>(g.translated);
  const Cutoff eta{g.m1, bridged->b1(), bridged->a2(), g.m2, g.delta_cut};
  double prev = INFINITY;
  for (double nu : {g.nu, g.nu / 4, g.nu / 16}) {
    const MollifiedProfile m(bridged, eta, nu);
    double err = 0;
    for (double t : glue_check_points(eta, nu, 200)) err = std::max(err, std::abs(m(t).f - (*bridged)(t).f));
    EXPECT_LT(err, prev);
    EXPECT_LT(err, nu);
    prev = err;
  }
}

TEST(Gluing, CornersAreSmooth) {
  const GlueResult& g = reference_glue();
  const double h = 1e-6 * g.nu;
  for (double c : {g.translated.f1.hi(), g.translated.f2.lo()}) {
    for (double x : {-0.5, 0.0, 0.5}) {
      const double t = c + x * g.nu;
      const Jet p = g.f(t + h), q = g.f(t - h), j = g.f(t);
      EXPECT_NEAR((p.f - q.f) / (2 * h), j.d1, 1e-6 * std::max(1.0, std::abs(j.d1)));
      EXPECT_NEAR((p.d1 - q.d1) / (2 * h), j.d2, 1e-4 * std::max(1.0, std::abs(j.d2)));
    }
  }
}

TEST(Gluing, SlopeMismatchRejected) {
  const Pair& p = reference_pair();
  GlueInput bad = p.in;
  bad.f1 = neck_profile(1.0, 0.9 * p.eps, p.A, 3, p.A / 2, p.A);
  try {
    glue(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::HypothesisViolated);
  }
}

TEST(Gluing, SlopeAtLeastOneRejected) {
  // f = 2 s has R < 0: the hypotheses fail before any mollification
  const RadialProfile steep(1, 2, 3, [](double s) { return Jet{2 * s, 2, 0}; });
  const RadialProfile steep2(5, 6, 3, [](double s) { return Jet{2 * s, 2, 0}; });
  try {
    glue({steep, steep2, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::HypothesisViolated);
  }
}

TEST(Gluing, SelfGluingIsPSC) {
  // a convex PSC profile glued to its own copy, shifted by one and lifted by one slope unit
  const RadialProfile f1 = neck_profile(1.0, 0.5, 4, 3, 1, 3);
  const double k = f1(3).d1;
  const RadialProfile f2(4, 5, 3, [f1, k](double s) {
    const Jet j = f1(s - 1);
    return Jet{j.f + k, j.d1, j.d2};
  });
  const GlueResult g = glue({f1, f2, 3});
  EXPECT_GT(g.min_R, 0);
  EXPECT_NEAR(g.translated.f2.lo() - g.translated.f1.hi(), 1.0, 1e-12);
}
