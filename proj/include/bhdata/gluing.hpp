#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "errors.hpp"
#include "quadrature.hpp"
#include "radial_profile.hpp"

namespace bhdata {

struct GlueInput {
  RadialProfile f1, f2;
  int n = 3;
};

struct GlueOptions {
  int samples = 400;       // per interval for the hypothesis checks
  int check_samples = 1600; // per structural piece of the mollified window (4x the base count)
  double slope_tol = 1e-10;
  double nu_floor = 1e-12;
};

// Failed hypothesis, or empty when positivity, convexity, PSC and the end matching hold on the samples.
inline std::string glue_hypotheses(const GlueInput& in, const GlueOptions& opt = {}) {
  for (const RadialProfile* f : {&in.f1, &in.f2}) {
    for (int i = 0; i <= opt.samples; ++i) {
      const double s = f->lo() + (f->hi() - f->lo()) * i / opt.samples;
      const Jet j = (*f)(s);
      if (!(j.f > 0 && j.d1 > 0 && j.d2 > 0))
        return "positivity/monotonicity/convexity fails at s = " + sci(s);
      if (!(warped_line_curvature(in.n, j) > 0)) return "scalar curvature not positive at s = " + sci(s);
    }
  }
  const Jet e1 = in.f1(in.f1.hi()), e2 = in.f2(in.f2.lo());
  if (!(e1.f < e2.f)) return "end height " + sci(e1.f) + " not below start height " + sci(e2.f);
  if (!(std::abs(e1.d1 - e2.d1) < opt.slope_tol)) return "slope mismatch " + sci(std::abs(e1.d1 - e2.d1));
  return {};
}

// Shift f2 so the line of slope f1'(b1) from (b1, f1(b1)) reaches (a2, f2(a2)).
inline GlueInput translate_intervals(const GlueInput& in) {
  const double b1 = in.f1.hi();
  const Jet e1 = in.f1(b1), e2 = in.f2(in.f2.lo());
  const double gap = (e2.f - e1.f) / e1.d1;
  GlueInput out = in;
  out.f2 = in.f2.shifted(b1 + gap - in.f2.lo());
  return out;
}

// C^{1,1} profile: f1, the bridging line, then the translated f2.
class BridgedProfile {
 public:
  BridgedProfile(const GlueInput& translated) : f1_(translated.f1), f2_(translated.f2) {
    e1_ = f1_(f1_.hi());
  }
  double b1() const { return f1_.hi(); }
  double a2() const { return f2_.lo(); }
  Jet operator()(double s) const {
    if (s <= b1()) return f1_(s);
    if (s >= a2()) return f2_(s);
    return {e1_.f + e1_.d1 * (s - b1()), e1_.d1, 0};
  }

 private:
  RadialProfile f1_, f2_;
  Jet e1_;
};

// Cutoff equal to 1 on [b1 - dc, a2 + dc] and 0 outside [m1, m2].
struct Cutoff {
  double m1, b1, a2, m2, dc;
  StepJet operator()(double s) const {
    if (s <= m1 || s >= m2) return {0, 0, 0};
    if (s < b1 - dc) {
      const double w = b1 - dc - m1;
      const StepJet j = smoothstep((s - m1) / w);
      return {j.v, j.d1 / w, j.d2 / (w * w)};
    }
    if (s > a2 + dc) {
      const double w = m2 - a2 - dc;
      const StepJet j = smoothstep((m2 - s) / w);
      return {j.v, -j.d1 / w, j.d2 / (w * w)};
    }
    return {1, 0, 0};
  }
};

// f_nu(t) = int f~(t - nu eta(t) s) phi(s) ds with derivatives. The s-range is split where the
// argument crosses a corner of f~ so each piece sees a smooth integrand.
class MollifiedProfile {
 public:
  MollifiedProfile(std::shared_ptr<const BridgedProfile> f, Cutoff eta, double nu)
      : f_(std::move(f)), eta_(eta), nu_(nu) {}

  double nu() const { return nu_; }
  const Cutoff& cutoff() const { return eta_; }

  Jet operator()(double t) const {
    const StepJet e = eta_(t);
    if (e.v == 0) return (*f_)(t);
    const double r = nu_ * e.v;
    // corners at y = b1, a2  <=>  s = (t - y)/r
    std::vector<double> cuts = {-1.0};
    for (double y : {f_->a2(), f_->b1()}) {
      const double s = (t - y) / r;
      if (s > -1 && s < 1) cuts.push_back(s);
    }
    cuts.push_back(1.0);
    std::sort(cuts.begin(), cuts.end());
    const auto& g = gauss64();
    const double c = Mollifier::norm();
    Jet out;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double lo = cuts[k], hi = cuts[k + 1], hw = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
      if (hw <= 0) continue;
      for (std::size_t i = 0; i < g.x.size(); ++i) {
        const double s = cuts.size() == 2 ? g.x[i] : mid + hw * g.x[i];
        const double w = (cuts.size() == 2 ? g.w[i] : hw * g.w[i]) * c * Mollifier::raw(s);
        const double dy = 1 - nu_ * e.d1 * s, ddy = -nu_ * e.d2 * s;
        const Jet F = (*f_)(t - r * s);
        out.f += w * F.f;
        out.d1 += w * F.d1 * dy;
        out.d2 += w * (F.d2 * dy * dy + F.d1 * ddy);
      }
    }
    return out;
  }

 private:
  std::shared_ptr<const BridgedProfile> f_;
  Cutoff eta_;
  double nu_;
};

inline RadialProfile mollify_variable(std::shared_ptr<const BridgedProfile> f, const Cutoff& eta, double nu,
                                      double lo, double hi, int n) {
  auto m = std::make_shared<MollifiedProfile>(std::move(f), eta, nu);
  return RadialProfile(lo, hi, n, [m](double t) { return (*m)(t); });
}

struct GlueResult {
  RadialProfile f;
  GlueInput translated;
  double nu = 0;
  double delta_cut = 0;
  double m1 = 0, m2 = 0;
  double margin = 0;       // min(Omega[f] - f'') over the window samples
  double d = 0;            // a third of the bridged margin
  double min_R = 0;        // warped-line curvature over the window samples
  int attempts = 0;
};

// Check points over [m1, m2]: every cutoff ramp, plateau and corner neighbourhood gets its own
// uniform block, so features of width nu or of the ramp width are always resolved.
inline std::vector<double> glue_check_points(const Cutoff& eta, double nu, int per) {
  std::vector<double> cuts = {eta.m1, eta.b1 - eta.dc, eta.b1 - 2 * nu, eta.b1 + 2 * nu,
                              eta.a2 - 2 * nu, eta.a2 + 2 * nu, eta.a2 + eta.dc, eta.m2};
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> pts;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = std::clamp(cuts[k], eta.m1, eta.m2), hi = std::clamp(cuts[k + 1], eta.m1, eta.m2);
    if (!(hi > lo)) continue;
    for (int i = 0; i < per; ++i) pts.push_back(lo + (hi - lo) * i / per);
  }
  pts.push_back(eta.m2);
  return pts;
}

struct GlueScan {
  double margin = INFINITY, min_slope = INFINITY, min_R = INFINITY;
};

inline GlueScan glue_scan(const RadialProfile& f, const std::vector<double>& pts) {
  GlueScan s;
  for (double t : pts) {
    const Jet j = f(t);
    s.margin = std::min(s.margin, omega(f.dim(), j) - j.d2);
    s.min_slope = std::min(s.min_slope, j.d1);
    s.min_R = std::min(s.min_R, warped_line_curvature(f.dim(), j));
  }
  return s;
}

inline GlueResult glue(const GlueInput& in, const GlueOptions& opt = {}) {
  if (const std::string why = glue_hypotheses(in, opt); !why.empty())
    throw Error(ErrorKind::HypothesisViolated, why);
  const int n = in.n;
  GlueResult res;
  res.translated = translate_intervals(in);
  const auto bridged = std::make_shared<const BridgedProfile>(res.translated);
  const double a1 = in.f1.lo(), b1 = bridged->b1(), a2 = bridged->a2(), b2 = res.translated.f2.hi();
  const double gap = a2 - b1;
  if (!(omega(n, (*bridged)(b1)) > 0))
    throw Error(ErrorKind::HypothesisViolated, "bridge slope at or above 1: no positive curvature on the line");
  res.m1 = 0.5 * (a1 + b1);
  res.m2 = 0.5 * (a2 + b2);
  res.delta_cut = 0.5 * std::min(b1 - res.m1, res.m2 - a2);

  // 3d: smallest vertical gap between Omega[f~] and the second derivatives of the pieces
  double d3 = INFINITY;
  for (int i = 0; i <= opt.samples; ++i) {
    for (double t : {a1 + (b1 - a1) * i / opt.samples, b1 + gap * i / opt.samples,
                     a2 + (b2 - a2) * i / opt.samples}) {
      const Jet j = (*bridged)(t);
      d3 = std::min(d3, omega(n, j) - j.d2);
    }
  }
  res.d = d3 / 3;
  if (!(res.d > 0)) throw Error(ErrorKind::HypothesisViolated, "bridged profile has no curvature margin");

  const Cutoff eta{res.m1, b1, a2, res.m2, res.delta_cut};
  const double reach = std::min({gap / 4, res.m1 - a1, b2 - res.m2, res.delta_cut});
  for (double nu = reach; nu >= opt.nu_floor; nu *= 0.5) {
    ++res.attempts;
    const RadialProfile f = mollify_variable(bridged, eta, nu, a1, b2, n);
    const GlueScan s = glue_scan(f, glue_check_points(eta, nu, opt.check_samples));
    if (s.margin >= res.d && s.min_slope > 0 && s.min_R > 0) {
      res.f = f;
      res.nu = nu;
      res.margin = s.margin;
      res.min_R = s.min_R;
      return res;
    }
  }
  throw Error(ErrorKind::SearchExhausted, "no mollification radius above " + sci(opt.nu_floor));
}

}  // namespace bhdata
