#include <gtest/gtest.h>

#include <bhdata/collar.hpp>
#include <bhdata/paths.hpp>
#include <bhdata/radial_profile.hpp>

using namespace bhdata;

namespace {

MetricPath round_path(const GridPtr& G, double r, int count = 5) {
  MetricPath p;
  p.grid = G;
  p.t = t_samples(count);
  for (std::size_t k = 0; k < p.t.size(); ++k) p.s.push_back(PathSample::still(AxiMetric::round(G, r)));
  return p;
}

MetricPath conformal_collar_path(int N = 64, int count = 33) {
  const auto u = AxiFunction::cosine_series(AngularGrid::make(3, N), {1.0, 0.15});
  return reparametrize_plateau(volume_normalize(conformal_path(u, t_samples(count))));
}

}  // namespace

TEST(Collar, RoundCylinder) {
  for (int n : {3, 4}) {
    const MetricPath p = round_path(AngularGrid::make(n, 32), 2.0);
    for (double t : {0.0, 0.4, 1.0}) {
      const Eigen::VectorXd R = collar_curvature_nodes({3.0, 0.0, p}, t);
      EXPECT_LT((R.array() - n * (n - 1) / 4.0).abs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Collar, RoundPathIsNeck) {
  // a round path with the eps stretch is the warped line with profile rho sqrt(1 + eps s^2 / A^2)
  const double rho = 1.5, A = 4, eps = 0.7;
  for (int n : {3, 4}) {
    const MetricPath p = round_path(AngularGrid::make(n, 32), rho);
    const RadialProfile f = neck_profile(rho, eps, A, n, 0, A);
    for (double t : {0.0, 0.25, 0.6, 1.0}) {
      const double Rw = warped_line_curvature(n, f(A * t));
      EXPECT_LT((collar_curvature_nodes({A, eps, p}, t).array() - Rw).abs().maxCoeff(), 1e-8) << n << " " << t;
    }
  }
}

TEST(Collar, Homothety) {
  // scaling the path and A by lambda^2 and lambda scales R by lambda^{-2}
  const MetricPath p = conformal_collar_path(32, 17);
  MetricPath q = p;
  const double lam = 3;
  for (auto& s : q.s) {
    s.a *= lam;
    s.da *= lam;
    s.dda *= lam;
    s.b *= lam;
    s.db *= lam;
    s.ddb *= lam;
  }
  for (double t : {0.1, 0.3, 0.45}) {
    const Eigen::VectorXd R1 = collar_curvature_nodes({2.0, 0.5, p}, t), R2 = collar_curvature_nodes({2 * lam, 0.5, q}, t);
    EXPECT_LT((R1 / (lam * lam) - R2).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(FindA, RoundPathTakesInitialGuess) {
  const MetricPath p = round_path(AngularGrid::make(3, 32), 1.0);
  FindAOptions o;
  o.A0 = 8;
  const FindAResult r = find_A(p, 1.0, o);
  EXPECT_EQ(r.A, 8.0);
  EXPECT_EQ(r.doublings, 0);
  EXPECT_GE(r.min_R, 0.1 * 6);
}

TEST(FindA, ConformalPathAndRefinement) {
  const MetricPath p = conformal_collar_path();
  const FindAResult r = find_A(p, 0.5);
  EXPECT_GE(r.min_R, 0.1 * r.path_min_R);
  EXPECT_GE(r.min_R_eps1, 0.1 * r.path_min_R);
  if (r.doublings > 0) EXPECT_LT(collar_min_curvature({r.A / 2, 0.5, p}, 2), 0.1 * r.path_min_R);
  // twice finer slices keep the margin
  EXPECT_GT(collar_min_curvature({r.A, 0.5, p}, 4), 0);
  EXPECT_NEAR(collar_min_curvature({r.A, 0.5, p}, 4), r.min_R, 0.05 * r.min_R);
}

TEST(FindA, RejectsNonPSCPath) {
  const auto G = AngularGrid::make(3, 64);
  const auto u = AxiFunction::cosine_series(G, {1.0, 0.3});
  EXPECT_THROW(find_A(conformal_family(u, t_samples(9)), 0.5), Error);
}

TEST(Collar, EpsScan) {
  const MetricPath p = conformal_collar_path();
  const FindAResult r = find_A(p, 1.0);
  const auto scan = collar_eps_scan(p, r.A);
  ASSERT_EQ(scan.size(), 11u);
  for (const auto& [e, m] : scan) EXPECT_GT(m, 0) << e;
  EXPECT_DOUBLE_EQ(scan.back().first, 1.0);
}

TEST(Collar, BoundaryMinimalAndFoliated) {
  const auto u = AxiFunction::cosine_series(AngularGrid::make(3, 128), {1.0, 0.15});
  const MetricPath h = reparametrize_plateau(volume_normalize(conformal_path(u, t_samples(129))));
  const MetricPath g = equalize_volume_form(h);
  const CollarMetric c{find_A(g, 0.5).A, 0.5, g};
  const CollarBoundaryReport rep = collar_boundary_report(c);
  EXPECT_LT(rep.H0, 1e-8);
  EXPECT_GT(rep.min_H, 0);
  EXPECT_TRUE(rep.foliation);
  // with trace-free gdot H is the stretch term alone
  EXPECT_LE(rep.max_closed_gap, 1.01 * rep.gap_budget + 1e-12);  // pole values are extrapolated
  EXPECT_LT(rep.max_closed_gap, 1e-6);
}

TEST(Collar, UnequalizedPathIsNotMinimal) {
  // conformal path moves the volume form, so the bottom slice has H != 0
  const MetricPath p = conformal_path(AxiFunction::cosine_series(AngularGrid::make(3, 64), {1.0, 0.15}), t_samples(17));
  EXPECT_GT(collar_boundary_report({4.0, 0.5, p}).H0, 1e-3);
}
