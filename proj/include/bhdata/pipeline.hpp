#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "collar.hpp"
#include "errors.hpp"
#include "gluing.hpp"
#include "icf_flow.hpp"
#include "paths.hpp"
#include "schwarzschild.hpp"

namespace bhdata {

// Smallest mass allowed over a horizon of volume vol: 1/2 (vol/omega_n)^{(n-1)/n}.
inline double threshold_mass(double vol, int n) { return 0.5 * std::pow(vol / sphere_volume(n), (n - 1.0) / n); }

enum class InputClass { Conformal, StarShaped };

struct BuildConfig {
  int n = 3;
  InputClass input = InputClass::Conformal;
  std::vector<double> coefficients{1.0};  // cosine series of u or rho0
  std::optional<double> mass;             // absolute target mass
  std::optional<double> mass_ratio;       // or a multiple of the threshold
  int angular = 128;
  int path_samples = 129;
  double flow_stop_tol = 1e-12;
  double closure_tol = 1e-6;
  double kappa = 1.5;      // bump scale lambda = kappa * delta
  int s0_attempts = 20;
  int delta_attempts = 30;
  int verify_refine = 2;
  std::string output_dir = "out";
};

// ---------- input ----------

inline AxiMetric input_metric(const BuildConfig& c, const GridPtr& g) {
  const AxiFunction f = AxiFunction::cosine_series(g, c.coefficients);
  if (c.input == InputClass::StarShaped) return induced_metric({f});
  if (f.min() <= 0) throw Error(ErrorKind::InputNotPSC, "conformal factor must be positive");
  return AxiMetric::conformal(AxiFunction(g, f.values().array().pow(4.0 / (c.n - 2))));
}

// Target mass from the config against the input volume.
inline double target_mass(const BuildConfig& c, double vol) {
  if (c.mass) return *c.mass;
  if (c.mass_ratio) return *c.mass_ratio * threshold_mass(vol, c.n);
  throw Error(ErrorKind::Usage, "config needs mass or mass_ratio");
}

// ---------- parameter matching ----------

// Neck slope at s = A: rho eps / (A sqrt(1 + eps)), increasing in eps.
inline double neck_slope(double rho, double A, double eps) { return rho * eps / (A * std::sqrt(1 + eps)); }

// eps in (0,1) with neck_slope = y, by bisection; nullopt when y is outside the family's range.
inline std::optional<double> solve_eps(double rho, double A, double y, double tol = 1e-13) {
  if (!(y > 0) || !(y < neck_slope(rho, A, 1.0))) return std::nullopt;
  double lo = 0, hi = 1;
  for (int i = 0; i < 200 && hi - lo > 0; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double v = neck_slope(rho, A, mid);
    if (std::abs(v - y) < tol * std::max(1.0, y)) return mid;
    (v < y ? lo : hi) = mid;
    if (mid == lo && mid == hi) break;
  }
  return 0.5 * (lo + hi);
}

struct MatchResult {
  double eps = 0, s0 = 0, delta = 0, lambda = 0;
  double slope = 0;          // common slope at the joint
  double height_gap = 0;     // bent(s0 - delta) - f_eps(A)
  std::shared_ptr<const SchwarzschildProfile> base;
  std::shared_ptr<const BentProfile> bent;
  int s0_attempts = 0, delta_attempts = 0;
};

// Bent piece handed to the gluing: f2 = bent on [s0 - delta, s0 - delta/2].
inline RadialProfile glue_piece(const BentProfile& b) { return b.profile(b.lo(), b.lo() + 0.5 * b.delta()); }

namespace detail {

inline bool piece_admissible(const BentProfile& b, int samples = 400) {
  const RadialProfile f = glue_piece(b);
  for (int i = 0; i <= samples; ++i) {
    const double s = f.lo() + (f.hi() - f.lo()) * i / samples;
    const Jet j = f(s);
    if (!(j.f > 0 && j.d1 > 0 && j.d2 > 0 && warped_line_curvature(b.dim(), j) > 0)) return false;
  }
  return true;
}

// Delta-curve over [0, s0] stays right of and below Gamma.
inline bool delta_curve_clear(const SchwarzschildProfile& u, double s0, double rho, double A, int samples = 200) {
  for (int i = 0; i <= samples; ++i) {
    const Jet j = u(s0 * i / samples);
    if (!(j.d1 < neck_slope(rho, A, 1.0))) return false;
    const double e = j.d1 > 0 ? *solve_eps(rho, A, j.d1) : 0.0;
    if (!(j.f > rho * std::sqrt(1 + e))) return false;
  }
  return true;
}

}  // namespace detail

inline MatchResult match_parameters(double m, int n, double A, double rho, const BuildConfig& cfg = {}) {
  const double r0 = std::pow(2 * m, 1.0 / (n - 1));
  if (!(r0 > rho))
    throw Error(ErrorKind::MatchingFailed, "horizon radius " + sci(r0) + " not above plateau radius " + sci(rho) +
                                               ": mass at or below threshold");
  MatchResult res;
  res.base = std::make_shared<const SchwarzschildProfile>(solve_profile(m, n, default_s_max(m, n)));
  std::string last = "no attempt";
  double s0 = r0 / 2;
  for (int k = 0; k < cfg.s0_attempts; ++k, s0 *= 0.5) {
    ++res.s0_attempts;
    if (!detail::delta_curve_clear(*res.base, s0, rho, A)) {
      last = "Delta curve meets Gamma below s0 = " + sci(s0);
      continue;
    }
    double delta = s0 / 2;
    for (int j = 0; j < cfg.delta_attempts; ++j, delta /= 1.5) {
      ++res.delta_attempts;
      auto b = std::make_shared<const BentProfile>(res.base, s0, delta, cfg.kappa * delta);
      if (!(b->sigma(b->lo()).f > 0) || !check_bend(*b).ok || !detail::piece_admissible(*b)) continue;
      if (!verify_bent_psc(*b).pass) continue;
      const Jet start = (*b)(b->lo());
      const auto eps = solve_eps(rho, A, start.d1);
      if (!eps) {
        last = "joint slope " + sci(start.d1) + " outside the neck family at s0 = " + sci(s0);
        break;
      }
      const double gap = start.f - rho * std::sqrt(1 + *eps);
      if (!(gap > 0)) {
        last = "height inequality fails by " + sci(-gap) + " at s0 = " + sci(s0);
        break;
      }
      res.eps = *eps;
      res.s0 = s0;
      res.delta = delta;
      res.lambda = cfg.kappa * delta;
      res.slope = start.d1;
      res.height_gap = gap;
      res.bent = b;
      return res;
    }
  }
  throw Error(ErrorKind::MatchingFailed, "no matching parameters: " + last);
}

// ---------- composite ----------

struct CompositeMetric {
  BuildConfig config;
  int n = 3;
  double vol = 0;          // volume of the input metric
  // collar on t in [0, 1/2]; s = A t beyond
  double A = 0, eps = 0;
  MetricPath path;
  double rho = 0;          // plateau radius
  // bridge
  double nu = 0, delta_cut = 0, m1 = 0, m2 = 0, shift = 0;
  // bent segment, base mass and bend parameters
  double bent_mass = 0, s0 = 0, delta = 0, lambda = 0;
  // tail: u_{tail_mass}(s - shift) for s >= s0 + shift
  double tail_mass = 0;

  double neck_lo() const { return A / 2; }
  double tail_start() const { return s0 + shift; }
};

// Profiles reconstructed from the stored parameters.
struct CompositeProfiles {
  RadialProfile neck, bridge, bent, tail;
  std::shared_ptr<const SchwarzschildProfile> bent_base, tail_base;
  std::shared_ptr<const BentProfile> bent_raw;
  Cutoff eta{};
};

inline CompositeProfiles composite_profiles(const CompositeMetric& c) {
  CompositeProfiles p;
  const int n = c.n;
  p.neck = neck_profile(c.rho, c.eps, c.A, n, c.A / 2, c.A);
  p.bent_base = std::make_shared<const SchwarzschildProfile>(solve_profile(c.bent_mass, n, default_s_max(c.bent_mass, n)));
  p.tail_base = c.tail_mass == c.bent_mass
                    ? p.bent_base
                    : std::make_shared<const SchwarzschildProfile>(solve_profile(c.tail_mass, n, default_s_max(c.tail_mass, n)));
  p.bent_raw = std::make_shared<const BentProfile>(p.bent_base, c.s0, c.delta, c.lambda);
  const RadialProfile piece = glue_piece(*p.bent_raw).shifted(c.shift);
  const auto bridged = std::make_shared<const BridgedProfile>(GlueInput{p.neck, piece, n});
  p.eta = {c.m1, bridged->b1(), bridged->a2(), c.m2, c.delta_cut};
  p.bridge = mollify_variable(bridged, p.eta, c.nu, c.A / 2, piece.hi(), n);
  p.bent = p.bent_raw->profile().shifted(c.shift).restricted(c.m2, c.tail_start());
  const auto tb = p.tail_base;
  p.tail = tb->profile().shifted(c.shift).restricted(c.tail_start(), tb->hi() + c.shift);
  return p;
}

// ---------- verification ----------

struct SegmentReport {
  std::string name;
  double lo = 0, hi = 0;
  double min_R = 0, max_abs_R = 0;
  double min_H = 0;  // profile segments: n f'/f
};

struct JointReport {
  std::string name;
  double at = 0;
  double value_gap = 0, slope_gap = 0;
  bool ok = false;
};

struct VerificationReport {
  std::vector<SegmentReport> segments;
  std::vector<JointReport> joints;
  double boundary_H = 0;
  double min_slice_H = 0;
  double boundary_isometry = 0;  // sup |coefficients - input coefficients|
  double vol = 0;
  double adm_mass = 0;
  double misner_sharp_far = 0;   // from the bent segment's exact part
  double threshold = 0;
  double penrose_ratio = 0;
  double collar_min_R_full = 0;  // over t in [0,1]
  std::vector<std::pair<double, double>> eps_scan;
  double bent_noise_floor = 0;
  int bent_unresolved = 0;
  double max_trace_gdot = 0;
  bool clause_minimal = false, clause_isometric = false, clause_schwarzschild = false, clause_foliation = false,
       clause_psc = false, clause_penrose = false, joints_ok = false;
  bool pass = false;
};

namespace detail {

inline std::vector<double> uniform_points(double lo, double hi, int count) {
  std::vector<double> p;
  for (int i = 0; i <= count; ++i) p.push_back(lo + (hi - lo) * i / count);
  return p;
}

inline SegmentReport scan_profile(const std::string& name, const RadialProfile& f, const std::vector<double>& pts) {
  SegmentReport s{name, f.lo(), f.hi(), INFINITY, 0, INFINITY};
  for (double t : pts) {
    const Jet j = f(t);
    const double R = warped_line_curvature(f.dim(), j);
    s.min_R = std::min(s.min_R, R);
    s.max_abs_R = std::max(s.max_abs_R, std::abs(R));
    s.min_H = std::min(s.min_H, f.dim() * j.d1 / j.f);
  }
  return s;
}

inline JointReport profile_joint(const std::string& name, const RadialProfile& f, const RadialProfile& g, double at,
                                 double tol) {
  const Jet a = f(at), b = g(at);
  JointReport j{name, at, std::abs(a.f - b.f), std::abs(a.d1 - b.d1), false};
  j.ok = j.value_gap < tol && j.slope_gap < tol;
  return j;
}

// Dense near the horizon end, then geometric.
inline std::vector<double> tail_points(const RadialProfile& f, int count) {
  std::vector<double> p = uniform_points(f.lo(), std::min(f.hi(), f.lo() + 1.0), count);
  for (double s = f.lo() + 1.0; s < f.hi(); s = f.lo() + (s - f.lo()) * 1.01) p.push_back(s);
  p.push_back(f.hi());
  return p;
}

}  // namespace detail

inline constexpr double kJointTol = 1e-8;
inline constexpr double kBoundaryTol = 1e-8;
inline constexpr double kIsometryTol = 1e-10;
inline constexpr double kFlatTol = 1e-8;

// Recomputes every clause from the stored data; nothing from the build is trusted.
inline VerificationReport verify(const CompositeMetric& c) {
  VerificationReport r;
  const int n = c.n, refine = std::max(1, c.config.verify_refine);
  const GridPtr& G = c.path.grid;

  // boundary against the input
  const AxiMetric in = input_metric(c.config, G);
  const PathSample& p0 = c.path.s.front();
  r.boundary_isometry = std::max((p0.a - in.a.values()).cwiseAbs().maxCoeff(),
                                 (p0.b - in.beta.values()).cwiseAbs().maxCoeff());
  r.vol = volume(in);
  r.threshold = threshold_mass(r.vol, n);

  // collar: curvature on the used half and on the whole family
  const CollarMetric col{c.A, c.eps, c.path};
  SegmentReport cs{"collar", 0, c.A / 2, INFINITY, 0, INFINITY};
  double minH = INFINITY, bH = 0;
  for (double t : collar_slices(c.path, refine)) {
    const AxiFunction R = collar_scalar_curvature(col, t);
    const double mR = min_with_poles(R);
    r.collar_min_R_full = t == 0 ? mR : std::min(r.collar_min_R_full, mR);
    if (t > 0.5) continue;
    cs.min_R = std::min(cs.min_R, mR);
    cs.max_abs_R = std::max(cs.max_abs_R, std::max(std::abs(R.max()), std::abs(mR)));
    const AxiFunction H(G, collar_mean_curvature_nodes(col, t));
    const double lo = min_with_poles(H), hi = std::max({H.max(), H(0.0), H(std::numbers::pi)});
    if (t == 0)
      bH = std::max(std::abs(lo), std::abs(hi));
    else
      minH = std::min(minH, lo);
  }
  r.segments.push_back(cs);
  r.eps_scan = collar_eps_scan(c.path, c.A, refine);
  for (const auto& o : c.path.s) {
    const double tr = (2 * (o.da.array() / o.a.array() + (n - 1) * o.db.array() / o.b.array())).abs().maxCoeff();
    r.max_trace_gdot = std::max(r.max_trace_gdot, tr);
  }

  // profile segments
  const CompositeProfiles P = composite_profiles(c);
  const RadialProfile neck = P.neck.restricted(c.A / 2, c.m1);
  const RadialProfile bridge = P.bridge.restricted(c.m1, c.m2);
  r.segments.push_back(detail::scan_profile("neck", neck, detail::uniform_points(neck.lo(), neck.hi(), 400 * refine)));
  r.segments.push_back(detail::scan_profile("bridge", bridge, glue_check_points(P.eta, c.nu, 1600 * refine)));
  r.segments.push_back(detail::scan_profile("bent", P.bent, detail::uniform_points(P.bent.lo(), P.bent.hi(), 2000 * refine)));
  const BentReport br = verify_bent_psc(*P.bent_raw, 4000 * refine, kFlatTol);
  r.bent_noise_floor = br.noise_floor;
  r.bent_unresolved = br.unresolved;
  SegmentReport ts = detail::scan_profile("tail", P.tail, detail::tail_points(P.tail, 4000 * refine));
  r.segments.push_back(ts);

  // joints: collar top against the neck read through the top frame
  {
    const PathSample q = c.path.at(0.5);
    const double P2 = col.stretch(0.5), sp = std::sqrt(P2), dsp = c.eps * 0.5 / sp;
    const Jet f = P.neck(c.A / 2);
    const auto& th = G->theta();
    double vg = 0, sg = 0;
    for (int j = 0; j < G->size(); ++j) {
      const double Tt = c.path.top_dtheta ? (*c.path.top_dtheta)[j] : 1.0;
      const double T = c.path.top_theta ? (*c.path.top_theta)[j] : th[j];
      const double ra = std::sin(T) / std::sin(th[j]);
      vg = std::max({vg, std::abs(q.a[j] * sp - f.f * Tt), std::abs(q.b[j] * sp - f.f * ra)});
      // d/ds = A^{-1} d/dt
      sg = std::max({sg, std::abs((q.da[j] * sp + q.a[j] * dsp) / c.A - f.d1 * Tt),
                     std::abs((q.db[j] * sp + q.b[j] * dsp) / c.A - f.d1 * ra)});
    }
    r.joints.push_back({"collar/neck", c.A / 2, vg, sg, vg < kJointTol && sg < kJointTol});
  }
  r.joints.push_back(detail::profile_joint("neck/bridge", P.neck, P.bridge, c.m1, kJointTol));
  r.joints.push_back(detail::profile_joint("bridge/bent", P.bridge, P.bent, c.m2, kJointTol));
  r.joints.push_back(detail::profile_joint("bent/tail", P.bent, P.tail, c.tail_start(), kJointTol));
  r.joints_ok = std::all_of(r.joints.begin(), r.joints.end(), [](const JointReport& j) { return j.ok; });

  r.boundary_H = bH;
  double prof_H = INFINITY;
  for (std::size_t i = 1; i < r.segments.size(); ++i) prof_H = std::min(prof_H, r.segments[i].min_H);
  r.min_slice_H = std::min(minH, prof_H);
  r.adm_mass = c.tail_mass;
  r.misner_sharp_far = P.bent_base->mass_at(P.bent_base->hi());
  r.penrose_ratio = c.tail_mass / r.threshold;

  r.clause_minimal = r.boundary_H < kBoundaryTol;
  r.clause_isometric = r.boundary_isometry < kIsometryTol;
  r.clause_schwarzschild = ts.max_abs_R < kFlatTol && r.joints_ok &&
                           std::abs(r.misner_sharp_far - c.tail_mass) < kJointTol * std::max(1.0, c.tail_mass);
  r.clause_foliation = minH > 0 && prof_H > 0;
  bool eps_ok = std::all_of(r.eps_scan.begin(), r.eps_scan.end(), [](const auto& e) { return e.second > 0; });
  r.clause_psc = cs.min_R > 0 && r.segments[1].min_R > 0 && r.segments[2].min_R > 0 && br.pass && eps_ok;
  r.clause_penrose = r.penrose_ratio > 1;
  r.pass = r.clause_minimal && r.clause_isometric && r.clause_schwarzschild && r.clause_foliation && r.clause_psc &&
           r.clause_penrose;
  return r;
}

// ---------- build ----------

struct StageLog {
  std::string stage;
  std::string detail;
};

struct BuildResult {
  CompositeMetric composite;
  VerificationReport report;
  std::vector<StageLog> log;
  std::optional<FlowResult> flow;
  FindAResult find_a;
  MatchResult match;
  GlueResult glue;
  EqualizeReport equalize;
  ClosureReport closure;
  double path_min_R = 0;
};

template <class F>
auto run_stage(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

inline BuildResult build(const BuildConfig& cfg, const std::function<void(const std::string&)>& progress = {}) {
  auto note = [&](const std::string& s) {
    if (progress) progress(s);
  };
  if (cfg.n < 3) throw StageError("config", Error(ErrorKind::HypothesisViolated, "dimension n must be >= 3"));
  BuildResult out;
  CompositeMetric& c = out.composite;
  c.config = cfg;
  c.n = cfg.n;
  const GridPtr G = AngularGrid::make(cfg.n, cfg.angular);

  const AxiMetric in = run_stage("input", [&] { return input_metric(cfg, G); });
  run_stage("input", [&] {
    const double r = min_with_poles(scalar_curvature_axi(in, -1));
    if (!(r > 0)) throw Error(ErrorKind::InputNotPSC, "input metric is not PSC (min R = " + sci(r) + ")");
    return 0;
  });
  c.vol = volume(in);
  const double m = run_stage("config", [&] { return target_mass(cfg, c.vol); });
  const double thr = threshold_mass(c.vol, cfg.n);
  if (!(m > thr))
    throw StageError("matching", Error(ErrorKind::MatchingFailed,
                                       "mass " + sci(m) + " not above the threshold " + sci(thr) +
                                           ": omega_n (2m)^{n/(n-1)} > vol(g) is violated"));
  note("input ok: vol " + sci(c.vol) + ", threshold " + sci(thr) + ", m " + sci(m));

  const auto ts = t_samples(cfg.path_samples);
  MetricPath raw = run_stage("path", [&] {
    if (cfg.input == InputClass::Conformal)
      return conformal_path(AxiFunction::cosine_series(G, cfg.coefficients), ts);
    FlowOptions fo;
    fo.stop_tol = cfg.flow_stop_tol;
    out.flow = icf_flow(AxiFunction::cosine_series(G, cfg.coefficients), fo);
    return icf_to_metric_path(*out.flow, G, ts, cfg.closure_tol, &out.closure);
  });
  note("path ok");
  c.path = run_stage("normalize", [&] {
    return equalize_volume_form(reparametrize_plateau(volume_normalize(raw)), {}, &out.equalize);
  });
  out.path_min_R = c.path.min_curvature();
  c.rho = c.path.top_radius();
  const double rho_expected = std::pow(c.vol / sphere_volume(cfg.n), 1.0 / cfg.n);
  if (!(std::abs(c.rho - rho_expected) < 1e-8 * rho_expected))
    throw StageError("normalize", Error(ErrorKind::HypothesisViolated, "plateau radius " + sci(c.rho) +
                                                                           " differs from (vol/omega_n)^{1/n} = " +
                                                                           sci(rho_expected)));
  note("normalized path: sup |tr gdot| " + sci(out.equalize.max_trace_gdot));

  out.find_a = run_stage("collar", [&] { return find_A(c.path, 1.0); });
  c.A = out.find_a.A;
  note("collar A = " + sci(c.A));

  out.match = run_stage("matching", [&] { return match_parameters(m, cfg.n, c.A, c.rho, cfg); });
  c.eps = out.match.eps;
  c.bent_mass = c.tail_mass = m;
  c.s0 = out.match.s0;
  c.delta = out.match.delta;
  c.lambda = out.match.lambda;
  note("matched eps " + sci(c.eps) + ", s0 " + sci(c.s0) + ", delta " + sci(c.delta));

  out.glue = run_stage("gluing", [&] {
    const RadialProfile f1 = neck_profile(c.rho, c.eps, c.A, cfg.n, c.A / 2, c.A);
    return glue({f1, glue_piece(*out.match.bent), cfg.n});
  });
  c.nu = out.glue.nu;
  c.delta_cut = out.glue.delta_cut;
  c.m1 = out.glue.m1;
  c.m2 = out.glue.m2;
  c.shift = out.glue.translated.f2.lo() - out.match.bent->lo();
  note("glued with nu " + sci(c.nu));

  out.report = verify(c);
  return out;
}

}  // namespace bhdata
