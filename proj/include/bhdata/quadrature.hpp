#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace bhdata {

template <class Real = double>
struct GaussRule {
  std::vector<Real> x;
  std::vector<Real> w;
};

// Gauss-Legendre nodes/weights on [-1, 1], ascending.
template <class Real = double>
GaussRule<Real> gauss_legendre(int npts) {
  GaussRule<Real> r;
  r.x.resize(npts);
  r.w.resize(npts);
  const int half = (npts + 1) / 2;
  for (int i = 0; i < half; ++i) {
    Real z = std::cos(std::numbers::pi_v<Real> * (i + Real(0.75)) / (npts + Real(0.5)));
    Real dp = 0;
    for (int it = 0; it < 100; ++it) {
      Real p0 = 1, p1 = 0;
      for (int k = 1; k <= npts; ++k) {
        Real p2 = p1;
        p1 = p0;
        p0 = ((2 * k - 1) * z * p1 - (k - 1) * p2) / k;
      }
      dp = npts * (z * p0 - p1) / (z * z - 1);
      Real dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 4 * std::numeric_limits<Real>::epsilon()) break;
    }
    Real p0 = 1, p1 = 0;
    for (int k = 1; k <= npts; ++k) {
      Real p2 = p1;
      p1 = p0;
      p0 = ((2 * k - 1) * z * p1 - (k - 1) * p2) / k;
    }
    dp = npts * (z * p0 - p1) / (z * z - 1);
    r.x[i] = -z;
    r.x[npts - 1 - i] = z;
    r.w[i] = r.w[npts - 1 - i] = 2 / ((1 - z * z) * dp * dp);
  }
  return r;
}

inline const GaussRule<double>& gauss64() {
  static const GaussRule<double> rule = gauss_legendre<double>(64);
  return rule;
}

inline const GaussRule<double>& gauss16() {
  static const GaussRule<double> rule = gauss_legendre<double>(16);
  return rule;
}

// Integrate f over [a, b] with a fixed rule.
template <class F>
double integrate(const GaussRule<double>& rule, double a, double b, F&& f) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) s += rule.w[i] * f(c + h * rule.x[i]);
  return s * h;
}

// Volume of the unit n-sphere.
inline double sphere_volume(int n) {
  const double k = 0.5 * (n + 1);
  return 2 * std::pow(std::numbers::pi, k) / std::tgamma(k);
}

// Even bump C exp(-1/(1-s^2)) on (-1,1). C makes the 64-point rule integrate it to 1,
// so the discrete moments used by every mollification are exact (sum 1, first moment 0).
class Mollifier {
 public:
  static double raw(double s) {
    const double q = 1 - s * s;
    return q > 0 ? std::exp(-1 / q) : 0.0;
  }

  static double norm() {
    static const double c = [] {
      const auto& g = gauss64();
      double s = 0;
      for (std::size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * raw(g.x[i]);
      return 1 / s;
    }();
    return c;
  }

  static double phi(double s) { return norm() * raw(s); }
};

// Smooth monotone step: 0 for x <= 0, 1 for x >= 1, flat to all orders at both ends.
struct StepJet {
  double v, d1, d2;
};

inline StepJet smoothstep(double x) {
  if (x <= 0) return {0, 0, 0};
  if (x >= 1) return {1, 0, 0};
  const double g = 1 / x - 1 / (1 - x);
  double s, sc;  // s = S, sc = 1 - S
  if (g > 0) {
    const double e = std::exp(-g);
    s = e / (1 + e);
    sc = 1 / (1 + e);
  } else {
    const double e = std::exp(g);
    s = 1 / (1 + e);
    sc = e / (1 + e);
  }
  const double G = 1 / (x * x) + 1 / ((1 - x) * (1 - x));
  const double dG = -2 / (x * x * x) + 2 / ((1 - x) * (1 - x) * (1 - x));
  const double d1 = s * sc * G;
  const double d2 = d1 * (sc - s) * G + s * sc * dG;
  return {s, d1, d2};
}

// Quintic Hermite basis on [0,1]: weights for (f0, h f0', h^2 f0'', f1, h f1', h^2 f1'')
// and their first and second x-derivatives.
struct Hermite5 {
  std::array<double, 6> v, d1, d2;
};

inline Hermite5 hermite5(double x) {
  const double x2 = x * x, x3 = x2 * x, x4 = x3 * x, x5 = x4 * x;
  Hermite5 h;
  h.v = {1 - 10 * x3 + 15 * x4 - 6 * x5,
         x - 6 * x3 + 8 * x4 - 3 * x5,
         0.5 * (x2 - 3 * x3 + 3 * x4 - x5),
         10 * x3 - 15 * x4 + 6 * x5,
         -4 * x3 + 7 * x4 - 3 * x5,
         0.5 * (x3 - 2 * x4 + x5)};
  h.d1 = {-30 * x2 + 60 * x3 - 30 * x4,
          1 - 18 * x2 + 32 * x3 - 15 * x4,
          0.5 * (2 * x - 9 * x2 + 12 * x3 - 5 * x4),
          30 * x2 - 60 * x3 + 30 * x4,
          -12 * x2 + 28 * x3 - 15 * x4,
          0.5 * (3 * x2 - 8 * x3 + 5 * x4)};
  h.d2 = {-60 * x + 180 * x2 - 120 * x3,
          -36 * x + 96 * x2 - 60 * x3,
          0.5 * (2 - 18 * x + 36 * x2 - 20 * x3),
          60 * x - 180 * x2 + 120 * x3,
          -24 * x + 84 * x2 - 60 * x3,
          0.5 * (6 * x - 24 * x2 + 20 * x3)};
  return h;
}

}  // namespace bhdata
