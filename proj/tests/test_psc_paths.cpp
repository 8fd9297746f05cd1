#include <gtest/gtest.h>

#include <bhdata/paths.hpp>

using namespace bhdata;

namespace {

GridPtr grid(int n, int N = 128) { return AngularGrid::make(n, N); }

// R(Phi^* h) at the nodes against R(h) read at Theta.
double pullback_gap(const MetricPath& h, const MetricPath& g, const EqualizeReport& rep) {
  double gap = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double tk = h.plateau && g.t[k] >= 0.5 ? 1.0 : g.t[k];
    const AxiFunction Rh(h.grid, h.curvature(h.at(tk)));
    const Eigen::VectorXd Rg = g.curvature(g.s[k]);
    for (int j = 0; j < Rg.size(); ++j) gap = std::max(gap, std::abs(Rg[j] - Rh(rep.theta_at[k][j])));
  }
  return gap;
}

}  // namespace

TEST(Flow, IcfTime) {
  EXPECT_DOUBLE_EQ(icf_time(0.5), 3.0);
  EXPECT_DOUBLE_EQ(icf_time(0.0), 0.0);
}

TEST(Flow, RoundSphereIsExact) {
  // rescaled radius e^{-t} rho stays at rho0
  FlowOptions o;
  o.min_time = 3;
  const auto f = icf_flow(AxiFunction::constant(grid(3, 32), 1.5), o);
  EXPECT_GE(f.stop_time, 3.0);
  EXPECT_LT((f.rho_at(3.0).array() / 1.5 - 1).abs().maxCoeff(), 1e-6);
  EXPECT_NEAR(f.rho_star, 1.5, 1e-12);
}

TEST(Flow, ConvergesExponentially) {
  FlowOptions o;
  o.stop_tol = 1e-8;
  const auto f = icf_flow(AxiFunction::cosine_series(grid(4, 64), {1.0, 0.3}), o);
  ASSERT_TRUE(f.delta_hat.has_value());
  EXPECT_GT(*f.delta_hat, 0);
  EXPECT_LT(f.final_deviation, 1e-8);
  EXPECT_TRUE(f.monotone_after_burn_in);
  EXPECT_GT(f.min_R, 0);
  EXPECT_LT(f.max_gauss_residual, 1e-9);
}

TEST(Flow, RejectsNonPositiveCurvature) {
  // a strong pinch makes R negative on the initial surface
  try {
    icf_flow(AxiFunction::cosine_series(grid(3, 64), {1.0, 0.0, 0.6}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CurvatureSignLost);
  }
}

TEST(Flow, MetricPathClosesSmoothly) {
  FlowOptions o;
  o.stop_tol = 1e-12;
  const auto G = grid(3, 64);
  const auto f = icf_flow(AxiFunction::cosine_series(G, {1.0, 0.2}), o);
  ClosureReport cr;
  const MetricPath p = icf_to_metric_path(f, G, t_samples(129), 1e-6, &cr);
  EXPECT_GT(p.min_curvature(), 0);
  EXPECT_LT(p.roundness_defect(), 1e-14);
  EXPECT_LT(cr.max_derivative, 1e-6);
}

TEST(ConformalPath, EndpointsAndPositivity) {
  const auto G = grid(3);
  const auto u = AxiFunction::cosine_series(G, {1.0, 0.15});
  const MetricPath p = conformal_path(u, t_samples(17));
  EXPECT_GT(p.min_curvature(), 0);
  EXPECT_LT(p.roundness_defect(), 1e-15);
  EXPECT_LT((p.s.front().a - u.values().array().square().matrix()).cwiseAbs().maxCoeff(), 1e-15);
  // derivative against a centered difference of the family
  const auto fam = conformal_family(u, {0.3 - 1e-5, 0.3 + 1e-5});
  const Eigen::VectorXd fd = (fam.s[1].a - fam.s[0].a) / 2e-5;
  EXPECT_LT((conformal_family(u, {0.3}).s[0].da - fd).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(ConformalPath, RejectsNonPSC) {
  const auto u = AxiFunction::cosine_series(grid(3), {1.0, 0.3});
  try {
    conformal_path(u, t_samples(9));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InputNotPSC);
  }
}

TEST(Normalization, VolumeConstant) {
  const auto u = AxiFunction::cosine_series(grid(3), {1.0, 0.15});
  const MetricPath p = volume_normalize(conformal_path(u, t_samples(17)));
  const double V0 = volume(p.metric(p.s.front()));
  for (double t : {0.0, 0.13, 0.5, 0.77, 1.0}) EXPECT_NEAR(volume(p.metric_at(t)) / V0, 1.0, 1e-8) << t;
  // first derivative of the volume vanishes at samples
  for (const auto& s : p.s) EXPECT_LT(std::abs(volume_jet(*p.grid, s).dv), 1e-10);
}

TEST(Normalization, Plateau) {
  const auto u = AxiFunction::cosine_series(grid(3), {1.0, 0.15});
  const MetricPath p = reparametrize_plateau(volume_normalize(conformal_path(u, t_samples(33))));
  EXPECT_TRUE(p.plateau);
  const PathSample a = p.at(0.6), b = p.s.back();
  EXPECT_EQ((a.a - b.a).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(a.da.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((p.s.front().a - p.at(0).a).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(p.s.front().da.cwiseAbs().maxCoeff(), 0.0);  // flat start
  EXPECT_DOUBLE_EQ(plateau_map(0.25).v, 0.5);
}

TEST(Equalize, TraceFreeAndCurvaturePreserved) {
  const auto u = AxiFunction::cosine_series(grid(3), {1.0, 0.15});
  const MetricPath h = reparametrize_plateau(volume_normalize(conformal_path(u, t_samples(129))));
  EqualizeReport rep;
  const MetricPath g = equalize_volume_form(h, {}, &rep);
  EXPECT_LT(rep.max_trace_gdot, 1e-6);
  EXPECT_LT(pullback_gap(h, g, rep), 1e-7);
  EXPECT_LT(g.roundness_defect(), 1e-10);
  EXPECT_NEAR(g.top_radius(), h.top_radius(), 1e-10);
  // dV_g is constant in t: compare node densities a beta^{n-1} at both ends
  const Eigen::VectorXd d0 = g.s.front().a.cwiseProduct(g.s.front().b.cwiseAbs2());
  const Eigen::VectorXd d1 = g.s.back().a.cwiseProduct(g.s.back().b.cwiseAbs2());
  EXPECT_LT((d0 - d1).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Equalize, NeedsVolumeNormalization) {
  const auto u = AxiFunction::cosine_series(grid(3, 32), {1.0, 0.15});
  EXPECT_THROW(equalize_volume_form(conformal_path(u, t_samples(5))), Error);
}

TEST(Margin, Round) {
  const auto G = grid(3, 32);
  const PscMargin m = psc_margin({AxiMetric::round(G), AxiMetric::round(G)});
  EXPECT_NEAR(m.min_R, 6.0, 1e-8);
  EXPECT_EQ(m.max_step_c2, 0.0);
  EXPECT_NEAR(psc_margin({AxiMetric::round(G, 2.0)}).min_R, 1.5, 1e-8);
}

TEST(Margin, RejectsNonPSC) {
  const auto G = grid(3);
  const auto u = AxiFunction::cosine_series(G, {1.0, 0.3});
  const auto g = AxiMetric::conformal(AxiFunction(G, u.values().array().pow(4)));
  EXPECT_THROW(psc_margin({AxiMetric::round(G), g}), Error);
}

namespace {

std::vector<AxiMetric> five_samples(const GridPtr& G) {
  std::vector<AxiMetric> gs;
  for (double e : {0.0, 0.05, 0.12, 0.05, 0.0}) {
    const auto u = AxiFunction::cosine_series(G, {1.0, e, 0.3 * e});
    gs.push_back(AxiMetric::conformal(AxiFunction(G, u.values().array().pow(4))));
  }
  return gs;
}

}  // namespace

TEST(Smoothing, LinearRegionIdentity) {
  const auto G = grid(3, 32);
  const auto gs = five_samples(G);
  const std::vector<double> ts{0, 0.25, 0.5, 0.75, 1};
  const SmoothedPath sp(ts, gs, 0.02);
  for (double t : {0.1, 0.2, 0.4, 0.6, 0.9}) {
    const Eigen::VectorXd q = sp.sample(t).a.cwiseAbs2();
    EXPECT_LT((q - sp.linear_a2(t)).cwiseAbs().maxCoeff(), 1e-12) << t;
  }
  // inside a window: closed form against direct convolution; both carry the bump quadrature error
  for (double t : {0.24, 0.25, 0.262}) EXPECT_LT((sp.squared(t, 0)[0] - sp.convolve_a2(t)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Smoothing, CornerIsC1) {
  const auto G = grid(3, 32);
  const std::vector<double> ts{0, 0.25, 0.5, 0.75, 1};
  const SmoothedPath sp(ts, five_samples(G), 0.02);
  const double h = 1e-5;
  for (double c : {0.25, 0.5, 0.75}) {
    for (double t : {c - 0.01, c, c + 0.013}) {
      // centered differences reproduce the closed-form derivatives
      const auto q = sp.squared(t, 0), qp = sp.squared(t + h, 0), qm = sp.squared(t - h, 0);
      EXPECT_LT(((qp[0] - qm[0]) / (2 * h) - q[1]).cwiseAbs().maxCoeff(), 1e-6);
      EXPECT_LT(((qp[1] - qm[1]) / (2 * h) - q[2]).cwiseAbs().maxCoeff(), 1e-4);
    }
    // the first derivative no longer jumps across the knot
    EXPECT_LT((sp.squared(c + 1e-9, 0)[1] - sp.squared(c - 1e-9, 0)[1]).cwiseAbs().maxCoeff(), 1e-5);
  }
  // while the unsmoothed slopes do
  const double e = 1e-6;
  EXPECT_GT(((sp.linear_a2(0.5 + e) - sp.linear_a2(0.5)) - (sp.linear_a2(0.5) - sp.linear_a2(0.5 - e))).cwiseAbs().maxCoeff() / e,
            1e-2);
}

TEST(Smoothing, EndpointsAndPositivity) {
  const auto G = grid(3, 32);
  const auto gs = five_samples(G);
  const MetricPath p = smooth_path({0, 0.25, 0.5, 0.75, 1}, gs, 0.02);
  EXPECT_GT(p.min_curvature(), 0);
  EXPECT_EQ((p.s.front().a - gs.front().a.values()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((p.s.back().b - gs.back().beta.values()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Smoothing, RadiusBound) {
  const auto G = grid(3, 16);
  EXPECT_THROW(SmoothedPath({0, 0.5, 1}, {AxiMetric::round(G), AxiMetric::round(G), AxiMetric::round(G)}, 0.2), Error);
}
