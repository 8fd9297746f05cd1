#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "icf_flow.hpp"
#include "metric_path.hpp"

namespace bhdata {

// ---------- conformal class ----------

// h(t) = ((1-t)u + t)^{4/(n-2)} g_* without any positivity check.
inline MetricPath conformal_family(const AxiFunction& u, const std::vector<double>& ts) {
  const GridPtr& g = u.grid();
  const int n = g->dim(), N = g->size();
  const double p = 2.0 / (n - 2);
  MetricPath path;
  path.grid = g;
  path.t = ts;
  for (double t : ts) {
    PathSample s;
    s.a.resize(N);
    s.da.resize(N);
    s.dda.resize(N);
    for (int j = 0; j < N; ++j) {
      const double w = (1 - t) * u[j] + t, du = 1 - u[j];
      s.a[j] = std::pow(w, p);
      s.da[j] = p * std::pow(w, p - 1) * du;
      s.dda[j] = p * (p - 1) * std::pow(w, p - 2) * du * du;
    }
    if (t == 1.0) s.a.setOnes();
    s.b = s.a;
    s.db = s.da;
    s.ddb = s.dda;
    path.s.push_back(std::move(s));
  }
  return path;
}

inline MetricPath conformal_path(const AxiFunction& u, const std::vector<double>& ts) {
  const int n = u.grid()->dim();
  if (u.min() <= 0) throw Error(ErrorKind::InputNotPSC, "conformal factor must be positive");
  Eigen::VectorXd c = u.values().array().pow(4.0 / (n - 2));
  const double r0 = min_with_poles(scalar_curvature_conformal(AxiFunction(u.grid(), c)));
  if (!(r0 > 0)) throw Error(ErrorKind::InputNotPSC, "input metric is not PSC (min R = " + sci(r0) + ")");
  MetricPath path = conformal_family(u, ts);
  for (std::size_t k = 0; k < path.size(); ++k) {
    const double m = path.min_curvature(path.s[k]);
    if (!(m > 0))
      throw Error(ErrorKind::PathPositivityFailed,
                  "R(h(t)) <= 0 at t = " + std::to_string(path.t[k]) + " (min " + sci(m) + ")");
  }
  return path;
}

// ---------- inverse curvature flow class ----------

inline double icf_time(double s) { return 1 / ((1 - s) * (1 - s)) - 1; }

struct ClosureReport {
  double last_flow_s = 0;     // largest sample still carried by the flow
  double max_derivative = 0;  // sup of s-derivatives there
  double value_gap = 0;       // distance to the round closure there
};

// Induced metrics of the rescaled flow, reparametrized by t = 1/(1-s)^2 - 1 and closed by the
// round metric of radius rho* at s = 1.
inline MetricPath icf_to_metric_path(const FlowResult& flow, const GridPtr& target, const std::vector<double>& ss,
                                     double closure_tol = 1e-6, ClosureReport* report = nullptr) {
  const GridPtr& fg = flow.grid;
  const int N = target->size();
  const bool same = fg->size() == target->size() && fg->method() == target->method();
  const Eigen::MatrixXd M = same ? Eigen::MatrixXd::Identity(N, N) : fg->interpolation_matrix(target->theta());
  const double rs = flow.rho_star;
  MetricPath path;
  path.grid = target;
  path.t = ss;
  ClosureReport cr;
  for (double s : ss) {
    const double t = s < 1 ? icf_time(s) : INFINITY;
    if (!(t < flow.stop_time)) {
      const AxiMetric round = AxiMetric::round(target, rs);
      path.s.push_back(PathSample::still(round));
      continue;
    }
    // Round-off at grid scale is amplified ~k^2 by each application of the flow operator.
    // State modes at round-off level are dropped and the time derivatives are kept to
    // twice the remaining bandwidth.
    const Eigen::VectorXd raw = flow.rho_at(t);
    const double floor = 1e3 * std::numeric_limits<double>::epsilon() * raw.cwiseAbs().maxCoeff();
    const int K = std::min(fg->size() - 1, 2 * fg->bandwidth(raw, floor) + 2);
    const Eigen::VectorXd rf = fg->truncate(raw, K);
    const Eigen::VectorXd rtf = fg->truncate(icf_rhs(fg, rf), K);
    Eigen::VectorXd rttf = Eigen::VectorXd::Zero(rf.size());
    const double vmax = rtf.cwiseAbs().maxCoeff();
    if (vmax > 0) {
      const double eta = 1e-5 / vmax;
      rttf = fg->truncate((icf_rhs(fg, rf + eta * rtf) - icf_rhs(fg, rf - eta * rtf)) / (2 * eta), K);
    }
    const Eigen::VectorXd r = M * rf, rt = M * rtf, rtt = M * rttf;
    const Eigen::VectorXd dr = target->diff1(r), drt = target->diff1(rt), drtt = target->diff1(rtt);
    PathSample p;
    p.a = (r.array().square() + dr.array().square()).sqrt();
    const Eigen::VectorXd at = (r.cwiseProduct(rt) + dr.cwiseProduct(drt)).cwiseQuotient(p.a);
    const Eigen::VectorXd att =
        (rt.array().square() + r.array() * rtt.array() + drt.array().square() + dr.array() * drtt.array() -
         at.array().square()) / p.a.array();
    const double tp = 2 / std::pow(1 - s, 3), tpp = 6 / std::pow(1 - s, 4);
    p.da = tp * at;
    p.dda = tpp * at + tp * tp * att;
    p.b = r;
    p.db = tp * rt;
    p.ddb = tpp * rt + tp * tp * rtt;
    cr.last_flow_s = s;
    cr.max_derivative = std::max({p.da.cwiseAbs().maxCoeff(), p.dda.cwiseAbs().maxCoeff(),
                                  p.db.cwiseAbs().maxCoeff(), p.ddb.cwiseAbs().maxCoeff()});
    cr.value_gap = std::max((p.a.array() - rs).abs().maxCoeff(), (p.b.array() - rs).abs().maxCoeff());
    path.s.push_back(std::move(p));
  }
  if (report) *report = cr;
  if (cr.max_derivative > closure_tol || cr.value_gap > closure_tol)
    throw Error(ErrorKind::ClosureNotSmooth, "path does not close smoothly at s = 1 (derivative " +
                                                 sci(cr.max_derivative) + ", gap " + sci(cr.value_gap) +
                                                 "); flow stopped too early");
  return path;
}

// ---------- normalizations ----------

struct VolumeJet {
  double v, dv, ddv;
};

inline VolumeJet volume_jet(const AngularGrid& g, const PathSample& p) {
  const int n = g.dim(), N = g.size();
  double v = 0, dv = 0, ddv = 0;
  for (int j = 0; j < N; ++j) {
    const double w = g.weights()[j], a = p.a[j], b = p.b[j], bn2 = std::pow(b, n - 3);
    const double bn1 = bn2 * b * b, bn = bn2 * b;
    v += w * a * bn1;
    dv += w * (p.da[j] * bn1 + (n - 1) * a * bn * p.db[j]);
    ddv += w * (p.dda[j] * bn1 + 2 * (n - 1) * p.da[j] * bn * p.db[j] + (n - 1) * a * bn * p.ddb[j] +
                (n - 1) * (n - 2.0) * a * bn2 * p.db[j] * p.db[j]);
  }
  const double c = sphere_volume(n - 1);
  return {c * v, c * dv, c * ddv};
}

// psi(t) h(t) with psi = (vol(h(0))/vol(h(t)))^{2/n}.
inline MetricPath volume_normalize(const MetricPath& in, double tol = 1e-8) {
  MetricPath out = in;
  const int n = in.dim();
  const double V0 = volume_jet(*in.grid, in.s.front()).v;
  for (std::size_t k = 0; k < in.size(); ++k) {
    const PathSample& p = in.s[k];
    const VolumeJet V = volume_jet(*in.grid, p);
    const double q = k == 0 ? 1.0 : std::pow(V0 / V.v, 1.0 / n);
    const double dq = -q * V.dv / (n * V.v);
    const double ddq = -(dq * V.dv / V.v + q * V.ddv / V.v - q * V.dv * V.dv / (V.v * V.v)) / n;
    PathSample& o = out.s[k];
    o.a = q * p.a;
    o.da = dq * p.a + q * p.da;
    o.dda = ddq * p.a + 2 * dq * p.da + q * p.dda;
    o.b = q * p.b;
    o.db = dq * p.b + q * p.db;
    o.ddb = ddq * p.b + 2 * dq * p.db + q * p.ddb;
  }
  for (const auto& o : out.s) {
    const double drift = std::abs(volume(out.metric(o)) / V0 - 1);
    if (drift > tol) throw Error(ErrorKind::Resolution, "volume normalization drift " + sci(drift));
  }
  out.volume_normalized = true;
  return out;
}

// zeta(t) = S(2t): smooth, monotone, flat to all orders at t = 0 and t = 1/2, identically 1 after.
inline StepJet plateau_map(double t) {
  const StepJet S = smoothstep(2 * t);
  return {S.v, 2 * S.d1, 4 * S.d2};
}

inline MetricPath reparametrize_plateau(const MetricPath& in) {
  MetricPath out;
  out.grid = in.grid;
  out.t = in.t;
  out.volume_normalized = in.volume_normalized;
  out.plateau = true;
  for (double t : in.t) {
    const StepJet z = plateau_map(t);
    if (z.v >= 1) {
      out.s.push_back(PathSample::still(in.metric(in.s.back())));
      continue;
    }
    const PathSample p = z.v <= 0 ? in.s.front() : in.at(z.v);
    PathSample o;
    o.a = p.a;
    o.b = p.b;
    o.da = z.d1 * p.da;
    o.db = z.d1 * p.db;
    o.dda = z.d2 * p.da + z.d1 * z.d1 * p.dda;
    o.ddb = z.d2 * p.db + z.d1 * z.d1 * p.ddb;
    out.s.push_back(std::move(o));
  }
  return out;
}

// ---------- volume-form equalization ----------

struct EqualizeOptions {
  int substeps = 4;        // RK4 steps between consecutive samples
  double fd_step = 1e-4;   // t-step for second derivatives
  double rcond_min = 1e-13;
};

struct EqualizeReport {
  double max_trace_gdot = 0;   // sup |tr_g dg/dt| over samples
  double min_rcond = INFINITY;
  double max_mean_residual = 0;  // Lagrange multiplier of the bordered solve
  std::vector<Eigen::VectorXd> theta_at;  // Theta used for each output sample
};

namespace detail {

class Equalizer {
 public:
  Equalizer(const MetricPath& h, const EqualizeOptions& o) : h_(h), g_(*h.grid), o_(o) {}

  // Solve Delta_h psi = -1/2 tr_h hdot (zero-mean projected) and return psi.
  Eigen::VectorXd solve_psi(const PathSample& p) {
    const int n = g_.dim(), N = g_.size();
    const Eigen::VectorXd da = g_.diff1(p.a), db = g_.diff1(p.b);
    Eigen::VectorXd vol(N), f(N);
    for (int j = 0; j < N; ++j) {
      vol[j] = g_.weights()[j] * p.a[j] * std::pow(p.b[j], n - 1);
      f[j] = -(p.da[j] / p.a[j] + (n - 1) * p.db[j] / p.b[j]);
    }
    if (f.cwiseAbs().maxCoeff() == 0) return Eigen::VectorXd::Zero(N);
    f.array() -= vol.dot(f) / vol.sum();
    Eigen::MatrixXd L(N + 1, N + 1);
    for (int j = 0; j < N; ++j) {
      const double cot = g_.cos()[j] / g_.sin()[j];
      const double c = (n - 1) * (cot + db[j] / p.b[j]) - da[j] / p.a[j];
      const double ia2 = 1 / (p.a[j] * p.a[j]);
      L.row(j).head(N) = ia2 * (g_.d2().row(j) + c * g_.d1().row(j));
      L(j, N) = 1;
    }
    L.row(N).head(N) = vol.transpose() / vol.sum();
    L(N, N) = 0;
    Eigen::VectorXd rhs(N + 1);
    rhs.head(N) = f;
    rhs[N] = 0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(L);
    const double rc = lu.rcond();
    rep.min_rcond = std::min(rep.min_rcond, rc);
    if (!(rc > o_.rcond_min)) throw Error(ErrorKind::SolveFailure, "singular elliptic system (rcond " + sci(rc) + ")");
    const Eigen::VectorXd x = lu.solve(rhs);
    rep.max_mean_residual = std::max(rep.max_mean_residual, std::abs(x[N]));
    return x.head(N);
  }

  // Gradient field X = psi'/a^2 and its theta-derivative at Theta = theta + Dp.
  void velocity(double t, const Eigen::VectorXd& Dp, Eigen::VectorXd& X, Eigen::VectorXd& dX) {
    const PathSample p = h_.at(t);
    const Eigen::VectorXd psi = solve_psi(p);
    const int N = g_.size();
    X.setZero(N);
    dX.setZero(N);
    if (psi.cwiseAbs().maxCoeff() == 0) return;
    const Eigen::VectorXd pp = g_.prepare_denoised(psi), pa = g_.prepare_denoised(p.a);
    for (int j = 0; j < N; ++j) {
      const auto s = g_.eval_displaced(psi, pp, j, Dp[j]);
      const auto a = g_.eval_displaced(p.a, pa, j, Dp[j]);
      X[j] = s[1] / (a[0] * a[0]);
      dX[j] = s[2] / (a[0] * a[0]) - 2 * s[1] * a[1] / (a[0] * a[0] * a[0]);
    }
  }

  // One RK4 step for (Dp, Theta_theta) with Theta = theta + Dp. Carrying the displacement keeps
  // Theta and pi - Theta at full relative precision next to the poles.
  void step(double t, double dt, Eigen::VectorXd& Dp, Eigen::VectorXd& P) {
    Eigen::VectorXd X1, D1, X2, D2, X3, D3, X4, D4;
    velocity(t, Dp, X1, D1);
    const Eigen::VectorXd k1t = X1, k1p = D1.cwiseProduct(P);
    velocity(t + dt / 2, Dp + dt / 2 * k1t, X2, D2);
    const Eigen::VectorXd k2t = X2, k2p = D2.cwiseProduct(P + dt / 2 * k1p);
    velocity(t + dt / 2, Dp + dt / 2 * k2t, X3, D3);
    const Eigen::VectorXd k3t = X3, k3p = D3.cwiseProduct(P + dt / 2 * k2p);
    velocity(t + dt, Dp + dt * k3t, X4, D4);
    const Eigen::VectorXd k4t = X4, k4p = D4.cwiseProduct(P + dt * k3p);
    Dp += dt / 6 * (k1t + 2 * k2t + 2 * k3t + k4t);
    P += dt / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
  }

  // Pullback g = Phi^* h(t) and its exact first t-derivative.
  void pullback(double t, const Eigen::VectorXd& Dp, const Eigen::VectorXd& P, Eigen::VectorXd& a,
                Eigen::VectorXd& b, Eigen::VectorXd& da, Eigen::VectorXd& db) {
    const PathSample p = h_.at(t);
    Eigen::VectorXd X, dX;
    velocity(t, Dp, X, dX);
    const int N = g_.size();
    // off-node derivatives weight the round-off tail of the samples by k
    const Eigen::VectorXd pa = g_.prepare_denoised(p.a), pb = g_.prepare_denoised(p.b),
                          pda = g_.prepare_denoised(p.da), pdb = g_.prepare_denoised(p.db);
    a.resize(N);
    b.resize(N);
    da.resize(N);
    db.resize(N);
    for (int j = 0; j < N; ++j) {
      // sin(Theta)/sin(theta) and cos(Theta)/sin(theta) through the displacement
      const double cot = g_.cos()[j] / g_.sin()[j], cd = std::cos(Dp[j]), sd = std::sin(Dp[j]);
      const double ratio = cd + cot * sd, cratio = cot * cd - sd;
      const auto A = g_.eval_displaced(p.a, pa, j, Dp[j]);
      const auto B = g_.eval_displaced(p.b, pb, j, Dp[j]);
      const double Ad = g_.eval_displaced(p.da, pda, j, Dp[j])[0];
      const double Bd = g_.eval_displaced(p.db, pdb, j, Dp[j])[0];
      a[j] = A[0] * P[j];
      b[j] = B[0] * ratio;
      da[j] = (Ad + A[1] * X[j]) * P[j] + A[0] * dX[j] * P[j];
      db[j] = (Bd + B[1] * X[j]) * ratio + B[0] * cratio * X[j];
    }
  }

  EqualizeReport rep;

 private:
  const MetricPath& h_;
  const AngularGrid& g_;
  EqualizeOptions o_;
};

}  // namespace detail

// g(t) = Phi_t^* h(t) where Phi_t integrates the gradient of psi solving Delta psi = -1/2 tr hdot;
// then d/dt dV_g = 0. Requires a volume-normalized path.
inline MetricPath equalize_volume_form(const MetricPath& h, const EqualizeOptions& opt = {},
                                       EqualizeReport* report = nullptr) {
  if (!h.volume_normalized) throw Error(ErrorKind::HypothesisViolated, "equalization needs a volume-normalized path");
  detail::Equalizer E(h, opt);
  const GridPtr& G = h.grid;
  const int n = G->dim(), N = G->size();
  MetricPath out;
  out.grid = G;
  out.t = h.t;
  out.volume_normalized = true;
  out.plateau = h.plateau;
  out.equalized = true;
  // flow ends where h stops moving
  const double t_end = h.plateau ? 0.5 : h.t.back();

  Eigen::VectorXd Dp = Eigen::VectorXd::Zero(N), P = Eigen::VectorXd::Ones(N);  // Theta = theta + Dp
  double tc = 0;
  auto advance = [&](double target) {
    if (target <= tc) return;
    const double span = target - tc;
    const int m = std::max(1, int(std::ceil(opt.substeps * span * (h.size() - 1))));
    const double dt = span / m;
    for (int i = 0; i < m; ++i) E.step(tc + i * dt, dt, Dp, P);
    tc = target;
  };
  auto first = [&](double t, const Eigen::VectorXd& d, const Eigen::VectorXd& p, Eigen::VectorXd& da,
                   Eigen::VectorXd& db) {
    Eigen::VectorXd a, b;
    E.pullback(t, d, p, a, b, da, db);
  };

  for (double t : h.t) {
    const double te = std::min(t, t_end);
    advance(te);
    E.rep.theta_at.push_back(G->theta() + Dp);
    PathSample o;
    if (h.plateau && t >= t_end) {
      // g(t) = Phi_{1/2}^* h(1), frozen
      Eigen::VectorXd da, db;
      E.pullback(1.0, Dp, P, o.a, o.b, da, db);
      o.da.setZero(N);
      o.db.setZero(N);
      o.dda.setZero(N);
      o.ddb.setZero(N);
      out.s.push_back(std::move(o));
      continue;
    }
    E.pullback(te, Dp, P, o.a, o.b, o.da, o.db);
    // second t-derivatives from the exact first derivatives at nearby times
    const double tau = opt.fd_step;
    auto shifted = [&](double dt, Eigen::VectorXd& da, Eigen::VectorXd& db) {
      Eigen::VectorXd d = Dp, p = P;
      E.step(te, dt, d, p);
      first(te + dt, d, p, da, db);
    };
    Eigen::VectorXd da1, db1, da2, db2;
    if (te - tau >= 0 && te + tau <= t_end) {
      shifted(tau, da1, db1);
      shifted(-tau, da2, db2);
      o.dda = (da1 - da2) / (2 * tau);
      o.ddb = (db1 - db2) / (2 * tau);
    } else {
      const double sg = te - tau < 0 ? 1.0 : -1.0;
      shifted(sg * tau, da1, db1);
      shifted(sg * 2 * tau, da2, db2);
      o.dda = sg * (-3 * o.da + 4 * da1 - da2) / (2 * tau);
      o.ddb = sg * (-3 * o.db + 4 * db1 - db2) / (2 * tau);
    }
    out.s.push_back(std::move(o));
  }
  if (h.plateau) {
    out.top_theta = G->theta() + Dp;
    out.top_dtheta = P;
  }
  EqualizeReport& rep = E.rep;
  for (const auto& o : out.s) {
    const Eigen::VectorXd tr = 2 * (o.da.array() / o.a.array() + (n - 1) * o.db.array() / o.b.array());
    rep.max_trace_gdot = std::max(rep.max_trace_gdot, tr.cwiseAbs().maxCoeff());
  }
  if (report) *report = rep;
  return out;
}

// ---------- discrete paths and smoothing ----------

struct PscMargin {
  double min_R = 0;
  double max_step_c2 = 0;  // sup over consecutive samples of the grid C^2 distance of (a^2, beta^2)
};

inline double c2_distance(const AxiMetric& g, const AxiMetric& h) {
  const auto& G = *g.grid();
  const Eigen::VectorXd da = g.a.values().array().square() - h.a.values().array().square();
  const Eigen::VectorXd db = g.beta.values().array().square() - h.beta.values().array().square();
  double d = 0;
  for (const Eigen::VectorXd& v : {da, db}) {
    d = std::max(d, v.cwiseAbs().maxCoeff());
    d = std::max(d, G.diff1(v).cwiseAbs().maxCoeff());
    d = std::max(d, G.diff2(v).cwiseAbs().maxCoeff());
  }
  return d;
}

inline PscMargin psc_margin(const std::vector<AxiMetric>& samples) {
  PscMargin m;
  m.min_R = INFINITY;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double r = min_with_poles(scalar_curvature_axi(samples[k], -1));
    if (!(r > 0)) throw Error(ErrorKind::NotPSC, "sample " + std::to_string(k) + " has min R = " + sci(r));
    m.min_R = std::min(m.min_R, r);
    if (k > 0) m.max_step_c2 = std::max(m.max_step_c2, c2_distance(samples[k - 1], samples[k]));
  }
  return m;
}

// Piecewise-linear interpolation of (a^2, beta^2) through samples, with each interior corner
// mollified by the even bump at radius sigma. Away from the corner windows nothing changes.
class SmoothedPath {
 public:
  SmoothedPath(std::vector<double> ts, const std::vector<AxiMetric>& gs, double sigma)
      : t_(std::move(ts)), sigma_(sigma) {
    if (t_.size() != gs.size() || t_.size() < 2) throw Error(ErrorKind::HypothesisViolated, "bad sample list");
    grid_ = gs.front().grid();
    double gap = INFINITY;
    for (std::size_t i = 1; i < t_.size(); ++i) gap = std::min(gap, t_[i] - t_[i - 1]);
    if (!(sigma > 0 && sigma < gap / 4))
      throw Error(ErrorKind::HypothesisViolated, "mollification radius must be below a quarter of the sample gap");
    for (const auto& g : gs) {
      qa_.push_back(g.a.values().array().square());
      qb_.push_back(g.beta.values().array().square());
    }
  }

  // r(y) = int (y - sigma s)_+ phi(s) ds and its first two derivatives.
  std::array<double, 3> kink(double y) const {
    if (y <= -sigma_) return {0, 0, 0};
    if (y >= sigma_) return {y, 1, 0};
    const double u = y / sigma_;
    double r = 0, r1 = 0;
    const auto& gl = gauss64();
    const double c = 0.5 * (u - 1), h = 0.5 * (u + 1);
    for (std::size_t i = 0; i < gl.x.size(); ++i) {
      const double s = c + h * gl.x[i], w = h * gl.w[i] * Mollifier::phi(s);
      r += w * (y - sigma_ * s);
      r1 += w;
    }
    return {r, r1, Mollifier::phi(u) / sigma_};
  }

  // (q, q', q'') for a^2 (which = 0) or beta^2 (which = 1) at all nodes.
  std::array<Eigen::VectorXd, 3> squared(double t, int which) const {
    const auto& q = which == 0 ? qa_ : qb_;
    const std::size_t K = t_.size();
    std::size_t i = std::size_t(std::upper_bound(t_.begin(), t_.end(), t) - t_.begin());
    i = i == 0 ? 0 : std::min(i - 1, K - 2);
    // nearest interior corner within the window, evaluated from the segment on its left
    std::size_t c = 0;
    for (std::size_t k = 1; k + 1 < K; ++k)
      if (std::abs(t - t_[k]) < sigma_) c = k;
    if (c == 0) {
      const Eigen::VectorXd m = (q[i + 1] - q[i]) / (t_[i + 1] - t_[i]);
      return {q[i] + (t - t_[i]) * m, m, Eigen::VectorXd::Zero(m.size())};
    }
    const Eigen::VectorXd ml = (q[c] - q[c - 1]) / (t_[c] - t_[c - 1]);
    const Eigen::VectorXd mr = (q[c + 1] - q[c]) / (t_[c + 1] - t_[c]);
    const auto r = kink(t - t_[c]);
    const Eigen::VectorXd dm = mr - ml;
    return {q[c] + (t - t_[c]) * ml + r[0] * dm, ml + r[1] * dm, r[2] * dm};
  }

  PathSample sample(double t) const {
    const auto A = squared(t, 0), B = squared(t, 1);
    PathSample p;
    p.a = A[0].cwiseSqrt();
    p.da = A[1].cwiseQuotient(2 * p.a);
    p.dda = (A[2] - 2 * p.da.cwiseAbs2()).cwiseQuotient(2 * p.a);
    p.b = B[0].cwiseSqrt();
    p.db = B[1].cwiseQuotient(2 * p.b);
    p.ddb = (B[2] - 2 * p.db.cwiseAbs2()).cwiseQuotient(2 * p.b);
    return p;
  }

  // Direct convolution of the piecewise-linear a^2 with the bump at radius sigma (independent
  // check), split where the argument crosses a knot.
  Eigen::VectorXd convolve_a2(double t) const {
    const auto& gl = gauss64();
    std::vector<double> cuts{-1.0, 1.0};
    for (double k : t_) {
      const double s = (t - k) / sigma_;
      if (s > -1 && s < 1) cuts.push_back(s);
    }
    std::sort(cuts.begin(), cuts.end());
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(qa_.front().size());
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double m = 0.5 * (cuts[c] + cuts[c + 1]), h = 0.5 * (cuts[c + 1] - cuts[c]);
      for (std::size_t i = 0; i < gl.x.size(); ++i) {
        const double s = m + h * gl.x[i];
        acc += h * gl.w[i] * Mollifier::phi(s) * linear_a2(t - sigma_ * s);
      }
    }
    return acc;
  }

  Eigen::VectorXd linear_a2(double t) const {
    const std::size_t K = t_.size();
    std::size_t i = std::size_t(std::upper_bound(t_.begin(), t_.end(), t) - t_.begin());
    i = i == 0 ? 0 : std::min(i - 1, K - 2);
    return qa_[i] + (t - t_[i]) * (qa_[i + 1] - qa_[i]) / (t_[i + 1] - t_[i]);
  }

  const std::vector<double>& knots() const { return t_; }
  double sigma() const { return sigma_; }
  const GridPtr& grid() const { return grid_; }

 private:
  std::vector<double> t_;
  double sigma_;
  GridPtr grid_;
  std::vector<Eigen::VectorXd> qa_, qb_;
};

// Smooth the discrete path, resample densely (corner windows resolved) and re-verify R > 0.
inline MetricPath smooth_path(const std::vector<double>& ts, const std::vector<AxiMetric>& gs, double sigma,
                              int per_window = 24, int per_segment = 16) {
  const SmoothedPath sp(ts, gs, sigma);
  std::vector<double> dense;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i)
    for (int k = 0; k < per_segment; ++k) dense.push_back(ts[i] + (ts[i + 1] - ts[i]) * k / per_segment);
  for (std::size_t c = 1; c + 1 < ts.size(); ++c)
    for (int k = -per_window; k <= per_window; ++k) dense.push_back(ts[c] + sigma * k / per_window);
  dense.push_back(ts.back());
  std::sort(dense.begin(), dense.end());
  dense.erase(std::unique(dense.begin(), dense.end(), [](double x, double y) { return std::abs(x - y) < 1e-15; }),
              dense.end());
  MetricPath out;
  out.grid = sp.grid();
  out.t = dense;
  for (double t : dense) out.s.push_back(sp.sample(t));
  out.s.front().a = gs.front().a.values();
  out.s.front().b = gs.front().beta.values();
  out.s.back().a = gs.back().a.values();
  out.s.back().b = gs.back().beta.values();
  const double m = out.min_curvature();
  if (!(m > 0)) throw Error(ErrorKind::PositivityLost, "smoothed path loses PSC (min R = " + sci(m) + ")");
  return out;
}

}  // namespace bhdata
