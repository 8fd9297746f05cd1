#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "axi_metric.hpp"

namespace bhdata {

// Node values of a, beta and their first two t-derivatives at one path parameter.
struct PathSample {
  Eigen::VectorXd a, da, dda, b, db, ddb;

  static PathSample still(const AxiMetric& g) {
    const int N = g.a.size();
    return {g.a.values(), Eigen::VectorXd::Zero(N), Eigen::VectorXd::Zero(N),
            g.beta.values(), Eigen::VectorXd::Zero(N), Eigen::VectorXd::Zero(N)};
  }
};

enum class TGrid { Uniform, Chebyshev };

inline std::vector<double> t_samples(int count, TGrid kind = TGrid::Uniform) {
  std::vector<double> t(count);
  for (int i = 0; i < count; ++i)
    t[i] = kind == TGrid::Uniform ? double(i) / (count - 1)
                                  : 0.5 * (1 - std::cos(std::numbers::pi * i / (count - 1)));
  t.front() = 0;
  t.back() = 1;
  return t;
}

// Family h(t), t in [0,1], sampled in t with quintic Hermite interpolation between samples.
class MetricPath {
 public:
  GridPtr grid;
  std::vector<double> t;
  std::vector<PathSample> s;
  bool volume_normalized = false;
  bool plateau = false;  // h(t) = h(1) for t >= 1/2
  bool equalized = false;
  // For equalized paths g(1) = Phi^* (round): the map Theta and Theta_theta at the top.
  std::optional<Eigen::VectorXd> top_theta, top_dtheta;

  int dim() const { return grid->dim(); }
  std::size_t size() const { return t.size(); }

  AxiMetric metric(const PathSample& p) const { return {AxiFunction(grid, p.a), AxiFunction(grid, p.b)}; }
  AxiMetric metric_at(double tt) const { return metric(at(tt)); }

  PathSample at(double tt) const {
    if (plateau && tt >= 0.5) {
      PathSample p = s.back();
      p.da.setZero();
      p.dda.setZero();
      p.db.setZero();
      p.ddb.setZero();
      return p;
    }
    tt = std::clamp(tt, t.front(), t.back());
    std::size_t k = std::size_t(std::upper_bound(t.begin(), t.end(), tt) - t.begin());
    k = k == 0 ? 0 : k - 1;
    k = std::min(k, t.size() - 2);
    if (tt == t[k]) return s[k];
    if (tt == t[k + 1]) return s[k + 1];
    const double h = t[k + 1] - t[k], x = (tt - t[k]) / h;
    const auto H = hermite5(x);
    const PathSample &P = s[k], &Q = s[k + 1];
    auto mix = [&](const std::array<double, 6>& w, const Eigen::VectorXd& f0, const Eigen::VectorXd& d0,
                   const Eigen::VectorXd& e0, const Eigen::VectorXd& f1, const Eigen::VectorXd& d1,
                   const Eigen::VectorXd& e1, double scale) -> Eigen::VectorXd {
      return (w[0] * f0 + h * w[1] * d0 + h * h * w[2] * e0 + w[3] * f1 + h * w[4] * d1 + h * h * w[5] * e1) / scale;
    };
    PathSample r;
    r.a = mix(H.v, P.a, P.da, P.dda, Q.a, Q.da, Q.dda, 1);
    r.da = mix(H.d1, P.a, P.da, P.dda, Q.a, Q.da, Q.dda, h);
    r.dda = mix(H.d2, P.a, P.da, P.dda, Q.a, Q.da, Q.dda, h * h);
    r.b = mix(H.v, P.b, P.db, P.ddb, Q.b, Q.db, Q.ddb, 1);
    r.db = mix(H.d1, P.b, P.db, P.ddb, Q.b, Q.db, Q.ddb, h);
    r.ddb = mix(H.d2, P.b, P.db, P.ddb, Q.b, Q.db, Q.ddb, h * h);
    return r;
  }

  // Scalar curvature of the sample's metric at the nodes.
  Eigen::VectorXd curvature(const PathSample& p) const {
    const auto& G = *grid;
    return scalar_curvature_nodes(G, {p.a, G.diff1(p.a), G.diff2(p.a), p.b, G.diff1(p.b), G.diff2(p.b)});
  }

  // Minimum over nodes and both poles.
  double min_curvature(const PathSample& p) const {
    const AxiFunction R(grid, curvature(p));
    return std::min({R.min(), R(0.0), R(std::numbers::pi)});
  }

  double min_curvature() const {
    double m = INFINITY;
    for (const auto& p : s) m = std::min(m, min_curvature(p));
    return m;
  }

  // Deviation of h(1) from a round metric (pulled back through the top frame if present).
  double roundness_defect() const {
    const PathSample& p = s.back();
    const auto& th = grid->theta();
    const int N = grid->size();
    if (!top_theta) {
      const double r = p.a.mean();
      return std::max((p.a.array() - r).abs().maxCoeff(), (p.b.array() - r).abs().maxCoeff());
    }
    // a = r Theta_theta, beta = r sin(Theta)/sin(theta) for some r
    double r = 0;
    for (int j = 0; j < N; ++j) r += p.a[j] / (*top_dtheta)[j];
    r /= N;
    double d = 0;
    for (int j = 0; j < N; ++j) {
      d = std::max(d, std::abs(p.a[j] - r * (*top_dtheta)[j]));
      d = std::max(d, std::abs(p.b[j] - r * std::sin((*top_theta)[j]) / std::sin(th[j])));
    }
    return d;
  }

  double top_radius() const {
    const PathSample& p = s.back();
    if (!top_theta) return p.a.mean();
    double r = 0;
    for (int j = 0; j < p.a.size(); ++j) r += p.a[j] / (*top_dtheta)[j];
    return r / p.a.size();
  }
};

// Slice mean curvature of A^2 dt^2 + h(t) w.r.t. d_t: tr_h(dh/dt) / (2A).
inline Eigen::VectorXd slice_mean_curvature(const PathSample& p, int n, double A) {
  return (p.da.array() / p.a.array() + (n - 1) * p.db.array() / p.b.array()) / A;
}

inline AxiFunction slice_mean_curvature(const MetricPath& path, double A, double t) {
  return AxiFunction(path.grid, slice_mean_curvature(path.at(t), path.dim(), A));
}

}  // namespace bhdata
