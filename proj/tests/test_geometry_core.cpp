#include <gtest/gtest.h>

#include <bhdata/axi_metric.hpp>
#include <bhdata/collar.hpp>
#include <bhdata/hypersurface.hpp>
#include <bhdata/radial_profile.hpp>

using namespace bhdata;
using std::numbers::pi;

namespace {

GridPtr grid(int n, int N = 128) { return AngularGrid::make(n, N); }

}  // namespace

TEST(Volume, RoundSpheres) {
  EXPECT_NEAR(volume(AxiMetric::round(grid(3))), 2 * pi * pi, 1e-12);
  EXPECT_NEAR(volume(AxiMetric::round(grid(4))), 8 * pi * pi / 3, 1e-12);
  // c g_* has volume c^{n/2} omega_n
  const double c = 2.5;
  const auto g = AxiMetric::conformal(AxiFunction::constant(grid(3), c));
  EXPECT_NEAR(volume(g), std::pow(c, 1.5) * 2 * pi * pi, 1e-11);
}

TEST(Volume, OddAndEvenWeights) {
  for (int n : {3, 4, 5, 6}) EXPECT_NEAR(grid(n, 64)->weights().sum() * sphere_volume(n - 1), sphere_volume(n), 1e-12);
}

TEST(Curvature, RoundIsConstant) {
  for (int n : {3, 4, 5}) {
    const AxiFunction R = scalar_curvature_axi(AxiMetric::round(grid(n)));
    EXPECT_NEAR(R.min(), n * (n - 1.0), 1e-9);
    EXPECT_NEAR(R.max(), n * (n - 1.0), 1e-9);
    // pole limit goes through second derivatives of the interpolant at theta = 0
    EXPECT_NEAR(pole_curvature(AxiMetric::round(grid(n)), 0), n * (n - 1.0), 1e-7);
  }
}

TEST(Curvature, Homothety) {
  // R(lambda g) = R(g) / lambda
  const auto G = grid(3);
  const auto u = AxiFunction::cosine_series(G, {1.0, 0.15});
  const auto g = AxiMetric::conformal(AxiFunction(G, u.values().array().pow(4)));
  const AxiFunction R1 = scalar_curvature_axi(g), R2 = scalar_curvature_axi(g.scaled(3.0));
  EXPECT_LT((R1.values() / 3.0 - R2.values()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Curvature, ConformalMatchesAxi) {
  for (int n : {3, 4}) {
    const auto G = grid(n);
    const auto u = AxiFunction::cosine_series(G, {1.0, 0.15, -0.04});
    const AxiFunction c(G, u.values().array().pow(4.0 / (n - 2)));
    const AxiFunction Rc = scalar_curvature_conformal(c);
    const AxiFunction Ra = scalar_curvature_axi(AxiMetric::conformal(c));
    EXPECT_LT((Rc.values() - Ra.values()).cwiseAbs().maxCoeff(), 1e-8) << "n = " << n;
  }
}

TEST(Curvature, ConformalExample) {
  // u = 1 + 0.3 cos on S^3: R = u^{-5}(6 + 9 cos) by direct substitution
  const auto G = grid(3);
  const auto u = AxiFunction::cosine_series(G, {1.0, 0.3});
  const AxiFunction R = scalar_curvature_conformal(AxiFunction(G, u.values().array().pow(4)));
  double err = 0;
  for (int j = 0; j < G->size(); ++j) {
    const double c = G->cos()[j];
    err = std::max(err, std::abs(R[j] - (6 + 9 * c) / std::pow(u[j], 5)));
  }
  EXPECT_LT(err, 1e-9);
  EXPECT_LT(R.min(), 0);
}

TEST(Curvature, ConstantFactorFour) {
  const auto G = grid(4);
  const AxiFunction R = scalar_curvature_conformal(AxiFunction::constant(G, 4.0));
  EXPECT_NEAR(R.min(), 3.0, 1e-10);
  EXPECT_NEAR(R.max(), 3.0, 1e-10);
}

TEST(Curvature, DiffeomorphismInvariance) {
  // pullback of the round metric by Theta = theta + 0.1 sin(2 theta)
  const auto G = grid(3);
  const auto dT = AxiFunction::from(G, [](double t) { return 1 + 0.2 * std::cos(2 * t); });
  const auto beta = AxiFunction::from(G, [](double t) { return std::sin(t + 0.1 * std::sin(2 * t)) / std::sin(t); });
  const AxiMetric g{dT, beta};
  EXPECT_TRUE(g.valid());
  const AxiFunction R = scalar_curvature_axi(g);
  EXPECT_LT((R.values().array() - 6).abs().maxCoeff(), 1e-8);
  EXPECT_NEAR(volume(g), 2 * pi * pi, 1e-10);
}

TEST(Curvature, SplineFallbackAgrees) {
  const auto Gs = AngularGrid::make(3, 256, DiffMethod::Spline);
  const auto u = AxiFunction::cosine_series(Gs, {1.0, 0.1});
  const AxiFunction c(Gs, u.values().array().pow(4));
  const AxiFunction R = scalar_curvature_axi(AxiMetric::conformal(c), -1);
  double err = 0;
  for (int j = 0; j < Gs->size(); ++j) err = std::max(err, std::abs(R[j] - (6 + 3 * Gs->cos()[j]) / std::pow(u[j], 5)));
  EXPECT_LT(err, 1e-3);
}

TEST(Laplacian, RoundEigenfunction) {
  const auto G = grid(3);
  const auto g = AxiMetric::round(G);
  const auto f = AxiFunction::from(G, [](double t) { return std::cos(t); });
  const AxiFunction L = laplace_beltrami(g, f);
  EXPECT_LT((L.values() + 3 * f.values()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Laplacian, IntegratesToZero) {
  const auto G = grid(3);
  const auto u = AxiFunction::cosine_series(G, {1.0, 0.2, 0.05});
  const auto g = AxiMetric::conformal(AxiFunction(G, u.values().array().square()));
  const auto f = AxiFunction::cosine_series(G, {0.0, 1.0, 0.0, 0.3});
  EXPECT_NEAR(integrate(g, laplace_beltrami(g, f).values()), 0.0, 1e-10);
}

TEST(WarpedLine, Cone) {
  // f = r gives flat space
  for (int n : {3, 4}) EXPECT_NEAR(warped_line_curvature(n, Jet{2.0, 1.0, 0.0}), 0.0, 1e-15);
  // cylinder of radius r: n(n-1)/r^2
  EXPECT_NEAR(warped_line_curvature(3, Jet{2.0, 0.0, 0.0}), 1.5, 1e-15);
  EXPECT_NEAR(omega(3, Jet{2.0, 0.0, 0.0}), 0.5, 1e-15);
}

TEST(SliceMeanCurvature, ClosedForm) {
  EXPECT_NEAR(collar_mean_curvature_closed(3, 10, 1, 1), 0.15, 1e-15);
  MetricPath p;
  p.grid = grid(3, 32);
  p.t = {0, 1};
  p.s = {PathSample::still(AxiMetric::round(p.grid)), PathSample::still(AxiMetric::round(p.grid))};
  const Eigen::VectorXd H = collar_mean_curvature_nodes({10, 1, p}, 1.0);
  EXPECT_LT((H.array() - 0.15).abs().maxCoeff(), 1e-14);
}

TEST(Hypersurface, RoundSphere) {
  const auto G = grid(3);
  const auto c = hypersurface_curvatures({AxiFunction::constant(G, 2.0)});
  EXPECT_LT((c.k_merid.values().array() - 0.5).abs().maxCoeff(), 1e-12);
  EXPECT_LT((c.H.values().array() - 1.5).abs().maxCoeff(), 1e-12);
  EXPECT_LT((c.R.values().array() - 1.5).abs().maxCoeff(), 1e-12);
}

TEST(Hypersurface, GaussIdentityAndInducedMetric) {
  const auto G = grid(3);
  const StarShapedHypersurface S{AxiFunction::cosine_series(G, {1.0, 0.2})};
  const auto c = hypersurface_curvatures(S);
  EXPECT_LT(c.gauss_residual, 1e-10);
  // intrinsic curvature of the induced metric equals the Gauss-equation value
  const AxiFunction R = scalar_curvature_axi(induced_metric(S));
  EXPECT_LT((R.values() - c.R.values()).cwiseAbs().maxCoeff(), 1e-8);
}
