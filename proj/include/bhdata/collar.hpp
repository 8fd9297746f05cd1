#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "errors.hpp"
#include "metric_path.hpp"

namespace bhdata {

// gamma = A^2 dt^2 + (1 + eps t^2) g(t) on [0,1] x S^n.
struct CollarMetric {
  double A = 1;
  double eps = 0;
  MetricPath path;

  int dim() const { return path.dim(); }
  double stretch(double t) const { return 1 + eps * t * t; }
};

namespace detail {

// Per-direction logarithmic rates of the diagonal entries e = P a^2 and e = P b^2:
// first = e'/e, second = e''/e.
struct DiagRates {
  Eigen::ArrayXd r1a, r2a, r1b, r2b;
};

inline DiagRates diag_rates(const PathSample& p, double P, double dP, double ddP) {
  const Eigen::ArrayXd a = p.a.array(), b = p.b.array();
  const Eigen::ArrayXd la = p.da.array() / a, lb = p.db.array() / b;
  const Eigen::ArrayXd qa = p.dda.array() / a, qb = p.ddb.array() / b;
  const double lp = dP / P, qp = ddP / P;
  DiagRates r;
  r.r1a = lp + 2 * la;
  r.r1b = lp + 2 * lb;
  r.r2a = qp + 4 * lp * la + 2 * la.square() + 2 * qa;
  r.r2b = qp + 4 * lp * lb + 2 * lb.square() + 2 * qb;
  return r;
}

}  // namespace detail

// Node values of R(gamma) on the slice t.
inline Eigen::VectorXd collar_curvature_nodes(const CollarMetric& c, double t) {
  const int n = c.dim();
  const PathSample p = c.path.at(t);
  const double P = c.stretch(t), dP = 2 * c.eps * t, ddP = 2 * c.eps;
  const auto r = detail::diag_rates(p, P, dP, ddP);
  const Eigen::ArrayXd tr1 = r.r1a + (n - 1) * r.r1b;
  const Eigen::ArrayXd tr2 = r.r2a + (n - 1) * r.r2b;
  const Eigen::ArrayXd sq = r.r1a.square() + (n - 1) * r.r1b.square();
  const Eigen::ArrayXd Rh = c.path.curvature(p).array() / P;
  return (Rh + (-tr2 - 0.25 * tr1.square() + 0.75 * sq) / (c.A * c.A)).matrix();
}

inline AxiFunction collar_scalar_curvature(const CollarMetric& c, double t) {
  return AxiFunction(c.path.grid, collar_curvature_nodes(c, t));
}

// Evaluation slices: every path sample plus (refine - 1) interior points per interval.
inline std::vector<double> collar_slices(const MetricPath& path, int refine = 1) {
  std::vector<double> ts;
  for (std::size_t i = 0; i + 1 < path.t.size(); ++i)
    for (int k = 0; k < refine; ++k) ts.push_back(path.t[i] + (path.t[i + 1] - path.t[i]) * k / refine);
  ts.push_back(path.t.back());
  return ts;
}

// Minimum of R(gamma) over slices and nodes, poles included.
inline double collar_min_curvature(const CollarMetric& c, int refine = 1) {
  double m = INFINITY;
  for (double t : collar_slices(c.path, refine)) m = std::min(m, min_with_poles(collar_scalar_curvature(c, t)));
  return m;
}

// General slice mean curvature w.r.t. the unit normal A^{-1} d_t.
inline Eigen::VectorXd collar_mean_curvature_nodes(const CollarMetric& c, double t) {
  const int n = c.dim();
  const PathSample p = c.path.at(t);
  const double lp = 2 * c.eps * t / c.stretch(t);
  return ((0.5 * n * lp + p.da.array() / p.a.array() + (n - 1) * p.db.array() / p.b.array()) / c.A).matrix();
}

// The closed form for a path with tr_g gdot = 0.
inline double collar_mean_curvature_closed(int n, double A, double eps, double t) {
  return n * eps * t / (A * (1 + eps * t * t));
}

struct FindAOptions {
  double A0 = 1;
  double cap = 1e6;
  double margin = 0.1;  // min R(gamma) >= margin * min R(g) for acceptance
  int refine = 2;
};

struct FindAResult {
  double A = 0;
  double min_R = 0;      // at the requested eps
  double min_R_eps1 = 0; // at eps = 1
  double path_min_R = 0;
  int doublings = 0;
};

inline FindAResult find_A(const MetricPath& path, double eps, const FindAOptions& opt = {}) {
  FindAResult res;
  res.path_min_R = path.min_curvature();
  if (!(res.path_min_R > 0)) throw Error(ErrorKind::NotPSC, "path minimum R " + sci(res.path_min_R));
  const double need = opt.margin * res.path_min_R;
  for (double A = opt.A0; A <= opt.cap; A *= 2, ++res.doublings) {
    const double r = collar_min_curvature({A, eps, path}, opt.refine);
    if (!(r >= need)) continue;
    const double r1 = eps == 1 ? r : collar_min_curvature({A, 1.0, path}, opt.refine);
    if (!(r1 >= need)) continue;
    res.A = A;
    res.min_R = r;
    res.min_R_eps1 = r1;
    return res;
  }
  throw Error(ErrorKind::SearchExhausted, "no collar length up to " + sci(opt.cap) + " reaches the curvature margin");
}

// min R(gamma_eps) on eps = 0, 0.1, ..., 1.
inline std::vector<std::pair<double, double>> collar_eps_scan(const MetricPath& path, double A, int refine = 2) {
  std::vector<std::pair<double, double>> out;
  for (int k = 0; k <= 10; ++k) {
    const double e = k / 10.0;
    out.emplace_back(e, collar_min_curvature({A, e, path}, refine));
  }
  return out;
}

struct CollarBoundaryReport {
  double H0 = 0;              // sup |H| on the bottom slice
  double min_H = INFINITY;    // over slices with t > 0
  double max_closed_gap = 0;  // sup |H - closed form|
  double gap_budget = 0;      // sup |tr_g gdot| / (2A)
  bool foliation = false;     // H0 small and min_H > 0
};

inline CollarBoundaryReport collar_boundary_report(const CollarMetric& c, int refine = 2, double h0_tol = 1e-8) {
  CollarBoundaryReport rep;
  const int n = c.dim();
  for (double t : collar_slices(c.path, refine)) {
    const AxiFunction H(c.path.grid, collar_mean_curvature_nodes(c, t));
    const double hmin = std::min({H.min(), H(0.0), H(std::numbers::pi)});
    const double hmax = std::max({H.max(), H(0.0), H(std::numbers::pi)});
    if (t == 0)
      rep.H0 = std::max(std::abs(hmin), std::abs(hmax));
    else
      rep.min_H = std::min(rep.min_H, hmin);
    const double closed = collar_mean_curvature_closed(n, c.A, c.eps, t);
    rep.max_closed_gap = std::max({rep.max_closed_gap, std::abs(hmin - closed), std::abs(hmax - closed)});
    const PathSample p = c.path.at(t);
    const double tr = (2 * (p.da.array() / p.a.array() + (n - 1) * p.db.array() / p.b.array())).abs().maxCoeff();
    rep.gap_budget = std::max(rep.gap_budget, tr / (2 * c.A));
  }
  rep.foliation = rep.H0 < h0_tol && rep.min_H > 0;
  return rep;
}

}  // namespace bhdata
