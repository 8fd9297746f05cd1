#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "hypersurface.hpp"

namespace bhdata {

struct FlowOptions {
  double stop_tol = 1e-6;     // sup |rho~ - mean rho~|
  double rtol = 1e-10;        // local error control of the embedded pair
  double atol = 1e-12;
  double cfl = 2.5;           // dt <= cfl / (D * lambda_max)
  double min_time = 0.0;      // keep integrating at least this long
  double t_max = 200.0;
  double dt_min = 1e-12;
  long max_steps = 2'000'000;
};

struct FlowResult {
  GridPtr grid;
  std::vector<double> t;
  std::vector<Eigen::VectorXd> rho;    // rescaled radial function e^{-t} rho
  std::vector<Eigen::VectorXd> rho_t;  // its t-derivative
  std::vector<double> deviation;       // sup |rho~ - mean|
  double rho_star = 0;
  std::optional<double> delta_hat;     // fitted exponential rate
  double stop_time = 0;
  double final_deviation = 0;
  double burn_in = 0;
  bool monotone_after_burn_in = false;
  double min_R = 0, min_H = 0;         // over the whole trajectory
  double max_gauss_residual = 0;
  long steps = 0, rejected = 0;

  // Rescaled state at time t by cubic Hermite in t between accepted steps.
  Eigen::VectorXd rho_at(double tt) const {
    if (tt <= t.front()) return rho.front();
    if (tt >= t.back()) return rho.back();
    const std::size_t k = std::size_t(std::upper_bound(t.begin(), t.end(), tt) - t.begin()) - 1;
    const double h = t[k + 1] - t[k], x = (tt - t[k]) / h;
    const double h00 = (1 + 2 * x) * (1 - x) * (1 - x), h10 = x * (1 - x) * (1 - x);
    const double h01 = x * x * (3 - 2 * x), h11 = x * x * (x - 1);
    return h00 * rho[k] + h * h10 * rho_t[k] + h01 * rho[k + 1] + h * h11 * rho_t[k + 1];
  }
};

namespace detail {

// Weighted mean over the sphere (measure sin^{n-1} dtheta).
inline double sphere_mean(const AngularGrid& g, const Eigen::VectorXd& v) {
  return g.integrate(v) / g.weights().sum();
}

}  // namespace detail

// Radial speed of the rescaled sigma1/sigma2 flow: (sigma1/sigma2) * L / rho - rho.
inline Eigen::VectorXd icf_rhs(const GridPtr& g, const Eigen::VectorXd& rho, double* minR = nullptr,
                               double* minH = nullptr, double* gauss = nullptr) {
  const StarShapedHypersurface S{AxiFunction(g, rho)};
  const auto C = hypersurface_curvatures(S);
  const int n = g->dim();
  const Eigen::VectorXd dr = g->diff1(rho);
  Eigen::VectorXd out(rho.size());
  for (int j = 0; j < rho.size(); ++j) {
    const double F = (n - 1) * C.H[j] / C.R[j];
    out[j] = F * std::hypot(rho[j], dr[j]) / rho[j] - rho[j];
  }
  if (minR) *minR = C.R.min();
  if (minH) *minH = C.H.min();
  if (gauss) *gauss = C.gauss_residual;
  return out;
}

inline FlowResult icf_flow(const AxiFunction& rho0, const FlowOptions& opt = {}) {
  const GridPtr& g = rho0.grid();
  const int n = g->dim(), N = g->size();
  if (rho0.min() <= 0) throw Error(ErrorKind::CurvatureSignLost, "initial radial function is not positive");
  FlowResult res;
  res.grid = g;
  double mR, mH, gr;
  Eigen::VectorXd k1 = icf_rhs(g, rho0.values(), &mR, &mH, &gr);
  if (!(mR > 0)) throw Error(ErrorKind::CurvatureSignLost, "initial hypersurface has R <= 0 (min " + sci(mR) + ")");
  if (!(mH > 0)) throw Error(ErrorKind::CurvatureSignLost, "initial hypersurface has H <= 0 (min " + sci(mH) + ")");
  res.min_R = mR;
  res.min_H = mH;
  res.max_gauss_residual = gr;

  // Dormand-Prince 5(4)
  // autonomous right-hand side, so the nodes c_i are not needed
  static constexpr double a21 = 1. / 5;
  static constexpr double a31 = 3. / 40, a32 = 9. / 40;
  static constexpr double a41 = 44. / 45, a42 = -56. / 15, a43 = 32. / 9;
  static constexpr double a51 = 19372. / 6561, a52 = -25360. / 2187, a53 = 64448. / 6561, a54 = -212. / 729;
  static constexpr double a61 = 9017. / 3168, a62 = -355. / 33, a63 = 46732. / 5247, a64 = 49. / 176,
                          a65 = -5103. / 18656;
  static constexpr double b1 = 35. / 384, b3 = 500. / 1113, b4 = 125. / 192, b5 = -2187. / 6784, b6 = 11. / 84;
  static constexpr double e1 = 71. / 57600, e3 = -71. / 16695, e4 = 71. / 1920, e5 = -17253. / 339200,
                          e6 = 22. / 525, e7 = -1. / 40;

  const double lam_max = double(N - 1) * (N + n - 2);
  auto diffusion = [&](const Eigen::VectorXd& r, const Eigen::VectorXd& k) {
    return ((k + r).array() / r.array().square()).abs().maxCoeff() / n;
  };

  Eigen::VectorXd y = rho0.values();
  double t = 0;
  auto dev = [&](const Eigen::VectorXd& v) { return (v.array() - detail::sphere_mean(*g, v)).abs().maxCoeff(); };
  res.t.push_back(0);
  res.rho.push_back(y);
  res.rho_t.push_back(k1);
  res.deviation.push_back(dev(y));
  double dt = std::min(1e-3, opt.cfl / (diffusion(y, k1) * lam_max));
  while (true) {
    const double d = res.deviation.back();
    if (d < opt.stop_tol && t >= opt.min_time) break;
    if (t >= opt.t_max) throw Error(ErrorKind::StepFailure, "flow did not converge before t_max (deviation " + sci(d) + ")");
    if (res.steps + res.rejected > opt.max_steps) throw Error(ErrorKind::StepFailure, "step budget exhausted");
    dt = std::min(dt, opt.cfl / (diffusion(y, k1) * lam_max));
    if (dt < opt.dt_min) throw Error(ErrorKind::StepFailure, "step size collapsed at t = " + std::to_string(t));
    const Eigen::VectorXd k2 = icf_rhs(g, y + dt * a21 * k1);
    const Eigen::VectorXd k3 = icf_rhs(g, y + dt * (a31 * k1 + a32 * k2));
    const Eigen::VectorXd k4 = icf_rhs(g, y + dt * (a41 * k1 + a42 * k2 + a43 * k3));
    const Eigen::VectorXd k5 = icf_rhs(g, y + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Eigen::VectorXd k6 = icf_rhs(g, y + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Eigen::VectorXd yn = y + dt * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    double R1, H1, G1;
    const Eigen::VectorXd k7 = icf_rhs(g, yn, &R1, &H1, &G1);
    const Eigen::VectorXd err = dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double en = 0;
    for (int j = 0; j < N; ++j) {
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y[j]), std::abs(yn[j]));
      en = std::max(en, std::abs(err[j]) / sc);
    }
    if (!std::isfinite(en) || en > 1) {
      ++res.rejected;
      dt *= std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.2;
      continue;
    }
    if (!(R1 > 0) || !(H1 > 0))
      throw Error(ErrorKind::CurvatureSignLost, "curvature sign lost at t = " + std::to_string(t + dt));
    t += dt;
    y = yn;
    k1 = k7;
    ++res.steps;
    res.min_R = std::min(res.min_R, R1);
    res.min_H = std::min(res.min_H, H1);
    res.max_gauss_residual = std::max(res.max_gauss_residual, G1);
    res.t.push_back(t);
    res.rho.push_back(y);
    res.rho_t.push_back(k1);
    res.deviation.push_back(dev(y));
    dt *= std::min(5.0, 0.9 * std::pow(std::max(en, 1e-10), -0.2));
  }
  res.stop_time = t;
  res.final_deviation = res.deviation.back();
  res.rho_star = detail::sphere_mean(*g, y);

  // log-deviation fit over the final half; burn-in is the first quarter
  res.burn_in = 0.25 * t;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (std::size_t k = 0; k < res.t.size(); ++k) {
    if (res.t[k] < 0.5 * t || res.deviation[k] <= 1e-14) continue;
    const double x = res.t[k], v = std::log(res.deviation[k]);
    sx += x; sy += v; sxx += x * x; sxy += x * v;
    ++cnt;
  }
  if (cnt >= 8) {
    const double den = cnt * sxx - sx * sx;
    if (den > 0) res.delta_hat = -(cnt * sxy - sx * sy) / den;
  }
  res.monotone_after_burn_in = true;
  double prev = INFINITY;
  for (std::size_t k = 0; k < res.t.size(); ++k) {
    if (res.t[k] < res.burn_in) continue;
    if (res.deviation[k] > prev * (1 + 1e-9) + 1e-15) res.monotone_after_burn_in = false;
    prev = res.deviation[k];
  }
  return res;
}

}  // namespace bhdata
