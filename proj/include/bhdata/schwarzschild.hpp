#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "errors.hpp"
#include "quadrature.hpp"
#include "radial_profile.hpp"

namespace bhdata {

struct SchwarzschildOptions {
  double node_spacing = 3e-3;  // near-horizon node spacing in units of r0; grows like 1 + s/r0
  double switch_slope = 0.1;   // u' at which the regularized start hands over to direct integration
  double tol = 1e-10;          // residual target for (c) between nodes; (d) of the raw interpolant gets 10x
};

// Spatial Schwarzschild profile u_m(s) in horizon-distance gauge:
// u(0) = r0, u'(0) = 0, u' = (1 - 2m/u^{n-1})^{1/2}, u'' = (n-1) m / u^n.
class SchwarzschildProfile {
 public:
  double m = 0;
  int n = 3;
  double r0 = 0;
  double s_max = 0;
  SampledProfile u;
  double max_residual_c = 0, max_residual_d = 0;

  double lo() const { return 0.0; }
  double hi() const { return u.hi(); }

  // 1 - 2m/u^{n-1} written in x = u - r0 so that it stays accurate at the horizon.
  double lapse2(double x) const { return -std::expm1(-(n - 1) * std::log1p(x / r0)); }
  double slope_at(double uval) const { return std::sqrt(std::max(0.0, lapse2(uval - r0))); }
  double accel_at(double uval) const { return (n - 1) * m / std::pow(uval, n); }

  // The interpolant carries u; u' and u'' are read off (c) and (d) at that value.
  Jet operator()(double s) const {
    const double v = u(s).f;
    return {v, slope_at(v), accel_at(v)};
  }

  RadialProfile profile() const {
    auto self = std::make_shared<SchwarzschildProfile>(*this);
    return RadialProfile(0.0, hi(), n, [self](double s) { return (*self)(s); });
  }

  // Second-order series at the horizon, the seed named by the construction.
  double series(double s) const { return r0 + (n - 1) * m / (2 * std::pow(r0, n)) * s * s; }

  // Misner-Sharp mass of the level sphere at s.
  double mass_at(double s) const {
    const Jet j = (*this)(s);
    return 0.5 * std::pow(j.f, n - 1) * (1 - j.d1 * j.d1);
  }
};

inline SchwarzschildProfile solve_profile(double m, int n, double s_max, const SchwarzschildOptions& opt = {}) {
  if (!(m > 0)) throw Error(ErrorKind::HypothesisViolated, "Schwarzschild mass must be positive");
  if (n < 3) throw Error(ErrorKind::HypothesisViolated, "sphere dimension must be >= 3");
  if (!(s_max > 0)) throw Error(ErrorKind::HypothesisViolated, "s_max must be positive");

  SchwarzschildProfile P;
  P.m = m;
  P.n = n;
  P.r0 = std::pow(2 * m, 1.0 / (n - 1));
  P.s_max = s_max;
  const double r0 = P.r0;
  const auto& gl = gauss16();

  // (c) is degenerate at u = r0. With u = r0 + w^2 the inverse relation
  // s(w) = int 2 / sqrt(G(w^2)/w^2) dw has a smooth integrand, G the lapse squared.
  auto q = [&](double x) { return x > 0 ? P.lapse2(x) / x : (n - 1) / r0; };
  auto dsdw = [&](double w) { return 2 / std::sqrt(q(w * w)); };
  auto dsdu = [&](double uu) { return 1 / std::sqrt(P.lapse2(uu - r0)); };

  std::vector<double> ss{0.0};
  std::vector<Jet> vv{{r0, 0.0, P.accel_at(r0)}};
  double s = 0, w = 0, uu = r0;
  bool near = true;
  while (s < s_max) {
    const double ds = opt.node_spacing * r0 * (1 + s / r0);
    double s_new, u_new, slope;
    if (near) {
      const double w_new = w + ds * std::sqrt(q(w * w)) / 2;
      s_new = s + integrate(gl, w, w_new, dsdw);
      u_new = r0 + w_new * w_new;
      slope = w_new * std::sqrt(q(w_new * w_new));
      w = w_new;
      if (slope > opt.switch_slope) near = false;
    } else {
      const double du = ds * P.slope_at(uu);
      u_new = uu + du;
      s_new = s + integrate(gl, uu, u_new, dsdu);
      slope = P.slope_at(u_new);
    }
    if (!(s_new > s) || !std::isfinite(s_new))
      throw Error(ErrorKind::StepFailure, "profile integration stalled at s = " + std::to_string(s));
    s = s_new;
    uu = u_new;
    ss.push_back(s);
    vv.push_back({u_new, slope, P.accel_at(u_new)});
  }
  P.u = SampledProfile(std::move(ss), std::move(vv));

  // Residuals of (c) and (d) for the raw interpolant between nodes (at nodes both vanish by construction).
  const auto& nodes = P.u.nodes();
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    for (double f : {0.25, 0.5, 0.75}) {
      const double x = nodes[k] + f * (nodes[k + 1] - nodes[k]);
      const Jet j = P.u(x);
      P.max_residual_c = std::max(P.max_residual_c, std::abs(j.d1 * j.d1 - P.lapse2(j.f - r0)));
      P.max_residual_d = std::max(P.max_residual_d, std::abs(j.d2 - P.accel_at(j.f)));
    }
  }
  if (P.max_residual_c > opt.tol || P.max_residual_d > 10 * opt.tol)
    throw Error(ErrorKind::StepFailure, "profile residual " + sci(std::max(P.max_residual_c, P.max_residual_d)) +
                                            " above target at the configured node spacing");
  return P;
}

inline double default_s_max(double m, int n) { return std::max(100.0, 50 * std::pow(2 * m, 1.0 / (n - 1))); }

// u_m o sigma with sigma' = 1 + exp(-lambda^2/(s - s0)^2) on [s0 - delta, s0) and sigma = id beyond.
// lambda = 1 is the classical bump; a smaller lambda rescales the bump to the width of the zone.
class BentProfile {
 public:
  BentProfile(std::shared_ptr<const SchwarzschildProfile> base, double s0, double delta, double lambda = 1.0,
              int panels = 256)
      : base_(std::move(base)), s0_(s0), delta_(delta), lambda_(lambda) {
    if (!(delta > 0 && delta < s0)) throw Error(ErrorKind::HypothesisViolated, "bend requires 0 < delta < s0");
    if (!(lambda > 0)) throw Error(ErrorKind::HypothesisViolated, "bump scale must be positive");
    if (s0 >= base_->hi()) throw Error(ErrorKind::HypothesisViolated, "bending point beyond the profile");
    const double a = s0 - delta;
    edges_.resize(panels + 1);
    cum_.assign(panels + 1, 0.0);
    for (int i = 0; i <= panels; ++i) edges_[i] = a + delta * i / panels;
    edges_[panels] = s0;
    for (int i = panels - 1; i >= 0; --i)
      cum_[i] = cum_[i + 1] + integrate(gauss16(), edges_[i], edges_[i + 1], [this](double x) { return bump(x); });
    K_ = s0 - delta - cum_[0];
  }

  const SchwarzschildProfile& base() const { return *base_; }
  std::shared_ptr<const SchwarzschildProfile> base_ptr() const { return base_; }
  double s0() const { return s0_; }
  double delta() const { return delta_; }
  double lambda() const { return lambda_; }
  double closure_constant() const { return K_; }
  double lo() const { return s0_ - delta_; }
  double hi() const { return base_->hi(); }
  int dim() const { return base_->n; }

  // exp(-lambda^2/(s-s0)^2), evaluated in log space and flushed to zero below 1e-300.
  double bump(double s) const {
    if (s >= s0_) return 0.0;
    const double x = s - s0_, z = -lambda_ * lambda_ / (x * x);
    return z < kLogFloor ? 0.0 : std::exp(z);
  }

  // int_s^{s0} bump
  double tail_integral(double s) const {
    if (s >= s0_) return 0.0;
    auto it = std::upper_bound(edges_.begin(), edges_.end(), s);
    std::size_t i = it == edges_.begin() ? 0 : std::size_t(it - edges_.begin());
    i = std::min(i, edges_.size() - 1);
    return cum_[i] + integrate(gauss16(), s, edges_[i], [this](double x) { return bump(x); });
  }

  Jet sigma(double s) const {
    if (s >= s0_) return {s, 1, 0};
    const double E = bump(s), x = s - s0_;
    return {s - tail_integral(s), 1 + E, 2 * lambda_ * lambda_ * E / (x * x * x)};
  }

  Jet operator()(double s) const {
    const Jet sg = sigma(s);
    if (s >= s0_) return (*base_)(s);
    const Jet u = (*base_)(sg.f);
    return {u.f, u.d1 * sg.d1, u.d2 * sg.d1 * sg.d1 + u.d1 * sg.d2};
  }

  // Factor B in (n-1)(1 - sigma'^2) - 2 u u' sigma'' = E * B; its sign is the sign of the
  // bending inequality since E > 0 on the zone.
  double inequality_factor(double s) const {
    const int n = dim();
    const double E = bump(s), x = std::abs(s - s0_);
    const Jet u = (*base_)(sigma(s).f);
    return -(n - 1) * (2 + E) + 4 * u.f * u.d1 * lambda_ * lambda_ / (x * x * x);
  }

  double inequality_lhs(double s) const { return bump(s) * inequality_factor(s); }

  RadialProfile profile() const { return profile(lo(), hi()); }
  RadialProfile profile(double lo, double hi) const {
    auto self = std::make_shared<BentProfile>(*this);
    return RadialProfile(lo, hi, dim(), [self](double s) { return (*self)(s); });
  }

  static constexpr double kLogFloor = -690.7755278982137;  // log(1e-300)

 private:
  std::shared_ptr<const SchwarzschildProfile> base_;
  double s0_, delta_, lambda_, K_ = 0;
  std::vector<double> edges_, cum_;
};

struct BendCheck {
  double min_factor = 0;     // min of B over the zone samples
  double min_lhs = 0;        // min of E*B where E is representable
  double sigma_left = 0;     // sigma(s0 - delta), must stay >= 0
  bool ok = false;
};

inline BendCheck check_bend(const BentProfile& b, int samples = 2000) {
  BendCheck c;
  c.min_factor = c.min_lhs = INFINITY;
  c.sigma_left = b.sigma(b.lo()).f;
  for (int i = 0; i < samples; ++i) {
    const double s = b.lo() + b.delta() * i / samples;
    const double B = b.inequality_factor(s);
    c.min_factor = std::min(c.min_factor, B);
    const double E = b.bump(s);
    if (E > 0) c.min_lhs = std::min(c.min_lhs, E * B);
  }
  c.ok = c.sigma_left > 0 && c.min_factor > 0;
  return c;
}

// Bend the profile at s0 with width delta; throws PositivityFailed when the inequality fails.
inline BentProfile bend(std::shared_ptr<const SchwarzschildProfile> base, double s0, double delta,
                        double lambda = 1.0, int samples = 2000) {
  BentProfile b(std::move(base), s0, delta, lambda);
  if (b.sigma(b.lo()).f < 0)
    throw Error(ErrorKind::PositivityFailed, "sigma leaves the profile domain for delta = " + std::to_string(delta));
  const BendCheck c = check_bend(b, samples);
  if (!c.ok)
    throw Error(ErrorKind::PositivityFailed,
                "bending inequality fails for delta = " + std::to_string(delta) + " (min factor " +
                    std::to_string(c.min_factor) + ")");
  return b;
}

// Shrink delta from s0/2 by 1.5x until the bending inequality holds.
inline BentProfile bend_search(std::shared_ptr<const SchwarzschildProfile> base, double s0, double lambda = 1.0,
                               int max_attempts = 40) {
  double delta = s0 / 2;
  for (int k = 0; k < max_attempts; ++k, delta /= 1.5) {
    try {
      return bend(base, s0, delta, lambda);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::PositivityFailed) throw;
    }
  }
  throw Error(ErrorKind::PositivityFailed, "no admissible delta found below s0/2");
}

struct BentReport {
  double min_R_resolved = INFINITY;  // over samples with R above the noise floor
  int resolved = 0, unresolved = 0, failed = 0;
  bool sliver_adjacent = true;       // unresolved samples form one run ending at s0
  double min_factor_unresolved = INFINITY;
  double max_abs_R_flat = 0;         // on [s0, s_max]
  double noise_floor = 0;
  bool pass = false;
};

// Curvature of ds^2 + (u o sigma)^2 g_* through the warped-line operator. Close to s0 the true
// curvature E*B falls below the round-off of the operator; such samples are certified by the
// factored inequality instead and must form a single run adjacent to s0.
inline BentReport verify_bent_psc(const BentProfile& b, int samples = 4000, double flat_tol = 1e-8) {
  BentReport r;
  const int n = b.dim();
  const RadialProfile f = b.profile();
  const double top = b.hi();
  // exact part: dense near s0, then geometric out to s_max
  std::vector<double> flat;
  for (int i = 0; i <= samples; ++i) flat.push_back(b.s0() + b.delta() * i / samples);
  for (double s = b.s0() + b.delta(); s < top; s = b.s0() + (s - b.s0()) * 1.01 + 1e-3) flat.push_back(s);
  flat.push_back(top);
  double near_noise = 0;
  for (double s : flat) {
    const double R = std::abs(warped_line_curvature(n, f(s)));
    r.max_abs_R_flat = std::max(r.max_abs_R_flat, R);
    if (s <= b.s0() + b.delta()) near_noise = std::max(near_noise, R);
  }
  r.noise_floor = std::max(1e-12, 10 * near_noise);

  bool seen_unresolved = false;
  for (int i = 0; i < samples; ++i) {
    const double s = b.lo() + b.delta() * i / samples;
    const double R = warped_line_curvature(n, f(s));
    if (R > r.noise_floor) {
      ++r.resolved;
      r.min_R_resolved = std::min(r.min_R_resolved, R);
      if (seen_unresolved) r.sliver_adjacent = false;
    } else if (R >= -r.noise_floor) {
      ++r.unresolved;
      seen_unresolved = true;
      r.min_factor_unresolved = std::min(r.min_factor_unresolved, b.inequality_factor(s));
    } else {
      ++r.failed;
    }
  }
  const bool sliver_ok = r.unresolved == 0 || (r.sliver_adjacent && r.min_factor_unresolved > 0);
  r.pass = r.failed == 0 && r.resolved > 0 && r.min_R_resolved > 0 && sliver_ok && r.max_abs_R_flat < flat_tol;
  return r;
}

}  // namespace bhdata
