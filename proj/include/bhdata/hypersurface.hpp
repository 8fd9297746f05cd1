#pragma once

#include <cmath>

#include "axi_metric.hpp"

namespace bhdata {

// Radial graph rho(theta) x over the unit sphere in R^{n+1}, rotationally symmetric.
struct StarShapedHypersurface {
  AxiFunction rho;
  int dim() const { return rho.grid()->dim(); }
};

struct HypersurfaceCurvatures {
  AxiFunction k_merid, k_azim, H, R, sigma1, sigma2;
  double gauss_residual = 0;  // sup |R - (H^2 - |II|^2)|
};

inline HypersurfaceCurvatures hypersurface_curvatures(const StarShapedHypersurface& S) {
  const auto& g = S.rho.grid();
  const int n = g->dim(), N = g->size();
  const Eigen::VectorXd& r = S.rho.values();
  const Eigen::VectorXd dr = S.rho.d1(), ddr = S.rho.d2();
  Eigen::VectorXd km(N), ka(N), H(N), R(N), s1(N), s2(N);
  double res = 0;
  for (int j = 0; j < N; ++j) {
    const double L = std::hypot(r[j], dr[j]);
    const double cot = g->cos()[j] / g->sin()[j];
    km[j] = (r[j] * r[j] + 2 * dr[j] * dr[j] - r[j] * ddr[j]) / (L * L * L);
    ka[j] = (1 - dr[j] / r[j] * cot) / L;
    H[j] = km[j] + (n - 1) * ka[j];
    R[j] = 2 * (n - 1) * km[j] * ka[j] + (n - 1) * (n - 2.0) * ka[j] * ka[j];
    s1[j] = H[j] / n;
    s2[j] = R[j] / (n * (n - 1.0));
    const double II2 = km[j] * km[j] + (n - 1) * ka[j] * ka[j];
    res = std::max(res, std::abs(R[j] - (H[j] * H[j] - II2)));
  }
  return {AxiFunction(g, km), AxiFunction(g, ka), AxiFunction(g, H), AxiFunction(g, R),
          AxiFunction(g, s1),  AxiFunction(g, s2), res};
}

// Induced metric: (rho^2 + rho'^2) dtheta^2 + rho^2 sin^2 g_{S^{n-1}}.
inline AxiMetric induced_metric(const StarShapedHypersurface& S) {
  const Eigen::VectorXd& r = S.rho.values();
  const Eigen::VectorXd dr = S.rho.d1();
  Eigen::VectorXd a = (r.array().square() + dr.array().square()).sqrt();
  return {AxiFunction(S.rho.grid(), a), S.rho};
}

}  // namespace bhdata
