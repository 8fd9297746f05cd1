#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadrature.hpp"

namespace bhdata {

struct Jet {
  double f = 0, d1 = 0, d2 = 0;
};

// Smooth positive f on [lo, hi] with derivative access; the fiber is the unit n-sphere.
class RadialProfile {
 public:
  using Fn = std::function<Jet(double)>;

  RadialProfile() = default;
  RadialProfile(double lo, double hi, int dim, Fn fn) : lo_(lo), hi_(hi), n_(dim), fn_(std::move(fn)) {}

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  int dim() const { return n_; }
  Jet operator()(double s) const { return fn_(s); }
  double value(double s) const { return fn_(s).f; }

  // Same profile read in a translated coordinate: g(s) = f(s - shift).
  RadialProfile shifted(double shift) const {
    Fn fn = fn_;
    return RadialProfile(lo_ + shift, hi_ + shift, n_, [fn, shift](double s) { return fn(s - shift); });
  }

  RadialProfile restricted(double lo, double hi) const { return RadialProfile(lo, hi, n_, fn_); }

 private:
  double lo_ = 0, hi_ = 0;
  int n_ = 3;
  Fn fn_;
};

// Quintic Hermite interpolation through (s_k, f_k, f'_k, f''_k).
class SampledProfile {
 public:
  SampledProfile() = default;
  SampledProfile(std::vector<double> s, std::vector<Jet> v) : s_(std::move(s)), v_(std::move(v)) {
    if (s_.size() < 2 || s_.size() != v_.size()) throw std::invalid_argument("SampledProfile: bad samples");
  }

  double lo() const { return s_.front(); }
  double hi() const { return s_.back(); }
  const std::vector<double>& nodes() const { return s_; }
  const std::vector<Jet>& samples() const { return v_; }

  Jet operator()(double s) const {
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t k = it == s_.begin() ? 0 : std::size_t(it - s_.begin()) - 1;
    k = std::min(k, s_.size() - 2);
    if (s == s_[k]) return v_[k];
    const double h = s_[k + 1] - s_[k], x = (s - s_[k]) / h;
    const auto H = hermite5(x);
    const Jet &p = v_[k], &q = v_[k + 1];
    const double c[6] = {p.f, h * p.d1, h * h * p.d2, q.f, h * q.d1, h * h * q.d2};
    Jet r;
    for (int i = 0; i < 6; ++i) {
      r.f += H.v[i] * c[i];
      r.d1 += H.d1[i] * c[i];
      r.d2 += H.d2[i] * c[i];
    }
    r.d1 /= h;
    r.d2 /= h * h;
    return r;
  }

 private:
  std::vector<double> s_;
  std::vector<Jet> v_;
};

inline double warped_line_curvature(int n, const Jet& f) {
  return n / (f.f * f.f) * ((n - 1) * (1 - f.d1 * f.d1) - 2 * f.f * f.d2);
}

// Obstruction functional: dt^2 + f^2 g_* is PSC iff f'' < omega.
inline double omega(int n, const Jet& f) { return (n - 1) * (1 - f.d1 * f.d1) / (2 * f.f); }

// Scalar field along a radial interval (curvature, Omega, ...).
struct RadialField {
  double lo = 0, hi = 0;
  std::function<double(double)> fn;
  double operator()(double s) const { return fn(s); }
};

inline RadialField scalar_curvature_warped_line(const RadialProfile& f) {
  return {f.lo(), f.hi(), [f](double s) { return warped_line_curvature(f.dim(), f(s)); }};
}

inline RadialField omega(const RadialProfile& f) {
  return {f.lo(), f.hi(), [f](double s) { return omega(f.dim(), f(s)); }};
}

inline RadialProfile constant_profile(double r, double lo, double hi, int n) {
  return RadialProfile(lo, hi, n, [r](double) { return Jet{r, 0, 0}; });
}

// Neck profile of the collar top under s = A t: rho sqrt(1 + eps s^2 / A^2).
inline RadialProfile neck_profile(double rho, double eps, double A, int n, double lo, double hi) {
  return RadialProfile(lo, hi, n, [rho, eps, A](double s) {
    const double c = eps / (A * A), q = 1 + c * s * s, r = std::sqrt(q);
    return Jet{rho * r, rho * c * s / r, rho * c / (q * r)};
  });
}

}  // namespace bhdata
