#pragma once

#include <cmath>
#include <string>

#include "angular_grid.hpp"
#include "errors.hpp"

namespace bhdata {

// a(theta)^2 dtheta^2 + b(theta)^2 g_{S^{n-1}} with b = beta sin(theta). Storing beta
// (even, positive) instead of b keeps the representation regular at the poles; smooth
// closure is beta = a at theta = 0, pi.
struct AxiMetric {
  AxiFunction a;
  AxiFunction beta;

  int dim() const { return a.grid()->dim(); }
  const GridPtr& grid() const { return a.grid(); }

  double b(double th) const { return beta(th) * std::sin(th); }

  static AxiMetric round(const GridPtr& g, double radius = 1.0) {
    return {AxiFunction::constant(g, radius), AxiFunction::constant(g, radius)};
  }

  // c g_* with c > 0.
  static AxiMetric conformal(const AxiFunction& c) {
    Eigen::VectorXd s = c.values().cwiseSqrt();
    return {AxiFunction(c.grid(), s), AxiFunction(c.grid(), s)};
  }

  AxiMetric scaled(double lambda) const {
    const double q = std::sqrt(lambda);
    return {AxiFunction(a.grid(), q * a.values()), AxiFunction(a.grid(), q * beta.values())};
  }

  // Positivity of a and beta at nodes and poles, closure at both poles.
  bool valid(double closure_tol = 1e-8) const {
    if (a.min() <= 0 || beta.min() <= 0) return false;
    for (double th : {0.0, std::numbers::pi}) {
      const double av = a(th), bv = beta(th);
      if (av <= 0 || bv <= 0) return false;
      if (std::abs(av - bv) > closure_tol * std::max(1.0, std::abs(av))) return false;
    }
    return true;
  }
};

// Minimum over nodes and the two poles (through the interpolant).
inline double min_with_poles(const AxiFunction& f) { return std::min({f.min(), f(0.0), f(std::numbers::pi)}); }

inline double volume(const AxiMetric& g) {
  const int n = g.dim();
  const Eigen::VectorXd& a = g.a.values();
  const Eigen::VectorXd& b = g.beta.values();
  Eigen::VectorXd f(a.size());
  for (int j = 0; j < a.size(); ++j) f[j] = a[j] * std::pow(b[j], n - 1);
  return sphere_volume(n - 1) * g.grid()->integrate(f);
}

// Node-level curvature kernel shared by every metric class.
struct AxiJets {
  Eigen::VectorXd a, da, dda, b, db, ddb;  // a, beta and their theta-derivatives
};

inline AxiJets jets(const AxiMetric& g) {
  return {g.a.values(), g.a.d1(), g.a.d2(), g.beta.values(), g.beta.d1(), g.beta.d2()};
}

inline Eigen::VectorXd scalar_curvature_nodes(const AngularGrid& grid, const AxiJets& J) {
  const int n = grid.dim(), N = grid.size();
  Eigen::VectorXd R(N);
  for (int j = 0; j < N; ++j) {
    const double s = grid.sin()[j], cot = grid.cos()[j] / s;
    const double a = J.a[j], da = J.da[j], b = J.b[j], db = J.db[j];
    const double bpp_b = J.ddb[j] / b + 2 * cot * db / b - 1;  // b''/b in terms of beta
    const double bp_b = db / b + cot;                           // b'/b
    // (a^2 - b'^2)/sin^2 with the pole singularity cancelled analytically
    const double Q = (a * a - b * b) / (s * s) + b * b - db * db - 2 * b * db * cot;
    R[j] = (n - 1) * (-2 * bpp_b / (a * a) + 2 * da * bp_b / (a * a * a) + (n - 2) * Q / (a * a * b * b));
  }
  return R;
}

// Limit of R at a pole from the Taylor data of a, beta there.
inline double pole_curvature(const AxiMetric& g, double th) {
  const int n = g.dim();
  const auto aj = g.a.jet(th), bj = g.beta.jet(th);
  const double a0 = aj[0], a2 = aj[2];
  const double b3 = 3 * bj[2] - bj[0];
  return -n * (n - 1.0) * (b3 - a2) / (a0 * a0 * a0);
}

inline void check_poles(const AxiFunction& R, const AxiMetric& g, double tol) {
  const double scale = std::max(1.0, R.values().cwiseAbs().maxCoeff());
  for (double th : {0.0, std::numbers::pi}) {
    const double lim = pole_curvature(g, th), ext = R(th);
    if (!(std::abs(lim - ext) <= tol * scale))
      throw Error(ErrorKind::Resolution, "pole curvature limit " + std::to_string(lim) +
                                             " disagrees with interior extrapolation " + std::to_string(ext));
  }
}

inline AxiFunction scalar_curvature_axi(const AxiMetric& g, double pole_tol = 1e-6) {
  AxiFunction R(g.grid(), scalar_curvature_nodes(*g.grid(), jets(g)));
  if (pole_tol > 0) check_poles(R, g, pole_tol);
  return R;
}

// R of c g_* through the conformal Laplacian of u = c^{(n-2)/4}.
inline AxiFunction scalar_curvature_conformal(const AxiFunction& c) {
  const auto& grid = *c.grid();
  const int n = grid.dim(), N = grid.size();
  Eigen::VectorXd u(N);
  for (int j = 0; j < N; ++j) u[j] = std::pow(c[j], (n - 2) / 4.0);
  const Eigen::VectorXd du = grid.diff1(u), ddu = grid.diff2(u);
  Eigen::VectorXd R(N);
  for (int j = 0; j < N; ++j) {
    const double lap = ddu[j] + (n - 1) * grid.cos()[j] / grid.sin()[j] * du[j];
    R[j] = std::pow(u[j], -(n + 2.0) / (n - 2)) * (-4.0 * (n - 1) / (n - 2) * lap + n * (n - 1.0) * u[j]);
  }
  return AxiFunction(c.grid(), R);
}

inline AxiFunction laplace_beltrami(const AxiMetric& g, const AxiFunction& u) {
  const auto& grid = *g.grid();
  const int n = grid.dim(), N = grid.size();
  const Eigen::VectorXd da = g.a.d1(), db = g.beta.d1(), du = u.d1(), ddu = u.d2();
  Eigen::VectorXd L(N);
  for (int j = 0; j < N; ++j) {
    const double a = g.a[j], b = g.beta[j], cot = grid.cos()[j] / grid.sin()[j];
    L[j] = (ddu[j] + ((n - 1) * (cot + db[j] / b) - da[j] / a) * du[j]) / (a * a);
  }
  return AxiFunction(g.grid(), L);
}

// Integral of f against dV_g.
inline double integrate(const AxiMetric& g, const Eigen::VectorXd& f) {
  const int n = g.dim();
  Eigen::VectorXd w(f.size());
  for (int j = 0; j < f.size(); ++j) w[j] = f[j] * g.a[j] * std::pow(g.beta[j], n - 1);
  return sphere_volume(n - 1) * g.grid()->integrate(w);
}

}  // namespace bhdata
