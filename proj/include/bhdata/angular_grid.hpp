#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "quadrature.hpp"

namespace bhdata {

enum class DiffMethod { Spectral, Spline };

// Interior Chebyshev points theta_j = (j + 1/2) pi / N on (0, pi). Axisymmetric data is
// treated through its even 2pi-periodic extension: a cosine series (spectral) or a
// periodic cubic spline on the doubled uniform grid (fallback).
class AngularGrid {
 public:
  AngularGrid(int dim, int npts, DiffMethod method = DiffMethod::Spectral)
      : n_(dim), N_(npts), method_(method) {
    if (dim < 3) throw std::invalid_argument("sphere dimension must be >= 3");
    if (npts < 8) throw std::invalid_argument("angular grid needs at least 8 nodes");
    const double pi = std::numbers::pi;
    theta_.resize(N_);
    sin_.resize(N_);
    cos_.resize(N_);
    for (int j = 0; j < N_; ++j) {
      theta_[j] = (j + 0.5) * pi / N_;
      sin_[j] = std::sin(theta_[j]);
      cos_[j] = std::cos(theta_[j]);
    }
    build_weights();
    coef_.resize(N_, N_);
    for (int k = 0; k < N_; ++k)
      for (int j = 0; j < N_; ++j) coef_(k, j) = (k == 0 ? 1.0 : 2.0) / N_ * std::cos(k * theta_[j]);
    synth_.resize(N_, N_);
    for (int j = 0; j < N_; ++j)
      for (int k = 0; k < N_; ++k) synth_(j, k) = std::cos(k * theta_[j]);
    if (method_ == DiffMethod::Spectral) {
      build_fourier();
    } else {
      build_spline();
    }
  }

  static std::shared_ptr<const AngularGrid> make(int dim, int npts, DiffMethod m = DiffMethod::Spectral) {
    return std::make_shared<const AngularGrid>(dim, npts, m);
  }

  int dim() const { return n_; }
  int size() const { return N_; }
  DiffMethod method() const { return method_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  const Eigen::VectorXd& sin() const { return sin_; }
  const Eigen::VectorXd& cos() const { return cos_; }
  // Quadrature weights for the measure sin^{n-1}(theta) d theta.
  const Eigen::VectorXd& weights() const { return w_; }
  const Eigen::MatrixXd& d1() const { return d1_; }
  const Eigen::MatrixXd& d2() const { return d2_; }

  Eigen::VectorXd coefficients(const Eigen::VectorXd& v) const { return coef_ * v; }

  // Drop cosine modes below an absolute threshold (round-off floor of smooth data).
  Eigen::VectorXd clip(const Eigen::VectorXd& v, double threshold) const {
    Eigen::VectorXd c = coef_ * v;
    for (int k = 1; k < N_; ++k)
      if (std::abs(c[k]) < threshold) c[k] = 0;
    return synth_ * c;
  }

  // Highest mode whose coefficient exceeds the threshold.
  int bandwidth(const Eigen::VectorXd& v, double threshold) const {
    const Eigen::VectorXd c = coef_ * v;
    for (int k = N_ - 1; k > 0; --k)
      if (std::abs(c[k]) > threshold) return k;
    return 0;
  }

  Eigen::VectorXd truncate(const Eigen::VectorXd& v, int kmax) const {
    Eigen::VectorXd c = coef_ * v;
    for (int k = std::max(kmax + 1, 1); k < N_; ++k) c[k] = 0;
    return synth_ * c;
  }

  // Cosine coefficients with the modes above the noise plateau set to exact zeros. The upper
  // half of the spectrum of resolved data is round-off, so ten times its median (or 1e3 eps
  // of the data) is the floor and modes up to twice the bandwidth above it are kept.
  Eigen::VectorXd denoised_coefficients(const Eigen::VectorXd& v) const {
    Eigen::VectorXd c = coef_ * v;
    const double scale = v.cwiseAbs().maxCoeff();
    if (scale == 0) return c;
    std::vector<double> tail;
    for (int k = N_ / 2; k < N_; ++k) tail.push_back(std::abs(c[k]));
    std::nth_element(tail.begin(), tail.begin() + tail.size() / 2, tail.end());
    const double floor = std::max(1e3 * std::numeric_limits<double>::epsilon() * scale, 10 * tail[tail.size() / 2]);
    int bw = 0;
    for (int k = N_ - 1; k > 0; --k)
      if (std::abs(c[k]) > floor) {
        bw = k;
        break;
      }
    for (int k = std::min(N_ - 1, 2 * bw + 2) + 1; k < N_; ++k) c[k] = 0;
    return c;
  }

  Eigen::VectorXd denoise(const Eigen::VectorXd& v) const { return synth_ * denoised_coefficients(v); }

  // Evaluation data with the noise tail removed (spectral); plain spline moments otherwise.
  Eigen::VectorXd prepare_denoised(const Eigen::VectorXd& v) const {
    return method_ == DiffMethod::Spectral ? denoised_coefficients(v) : prepare(v);
  }

  // Node derivatives. The mean is removed first: differentiation annihilates constants
  // exactly, and near-constant data then keeps its small variations to full precision.
  Eigen::VectorXd diff1(const Eigen::VectorXd& v) const { return d1_ * (v.array() - v.mean()).matrix(); }
  Eigen::VectorXd diff2(const Eigen::VectorXd& v) const { return d2_ * (v.array() - v.mean()).matrix(); }

  // Value and first two theta-derivatives of the interpolant at arbitrary theta.
  std::array<double, 3> eval(const Eigen::VectorXd& v, double th) const {
    return method_ == DiffMethod::Spectral ? eval_series(coef_ * v, th) : eval_spline(v, spline_m_ * v, th);
  }

  // Batched evaluation at many points; `pre` is coefficients (spectral) or spline moments.
  Eigen::VectorXd prepare(const Eigen::VectorXd& v) const {
    return method_ == DiffMethod::Spectral ? Eigen::VectorXd(coef_ * v) : Eigen::VectorXd(spline_m_ * v);
  }
  std::array<double, 3> eval_prepared(const Eigen::VectorXd& v, const Eigen::VectorXd& pre, double th) const {
    return method_ == DiffMethod::Spectral ? eval_series(pre, th) : eval_spline(v, pre, th);
  }

  // Evaluation at theta_j + disp. Spectral series on the southern half are read from the south
  // pole, f(pi - x) with x = (pi - theta_j) - disp, so pi - theta keeps full relative precision.
  std::array<double, 3> eval_displaced(const Eigen::VectorXd& v, const Eigen::VectorXd& pre, int j, double disp) const {
    if (method_ != DiffMethod::Spectral || 2 * j < N_) return eval_prepared(v, pre, theta_[j] + disp);
    const double x = (N_ - j - 0.5) * std::numbers::pi / N_ - disp;
    const auto r = eval_series(pre, x, true);
    return {r[0], -r[1], r[2]};
  }

  // Interpolation matrix onto another set of angles (rows: targets).
  Eigen::MatrixXd interpolation_matrix(const Eigen::VectorXd& targets) const {
    Eigen::MatrixXd m(targets.size(), N_);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(N_);
    for (int k = 0; k < N_; ++k) {
      e.setZero();
      e[k] = 1;
      const Eigen::VectorXd pre = prepare(e);
      for (int i = 0; i < targets.size(); ++i) m(i, k) = eval_prepared(e, pre, targets[i])[0];
    }
    return m;
  }

  // Integral of the node function against sin^{n-1} over [0, pi].
  double integrate(const Eigen::VectorXd& v) const { return w_.dot(v); }

 private:
  // cos(k th), sin(k th) by the rotation recurrence; `reflect` sums c_k (-1)^k cos(k th).
  // Extended precision: the recurrence error grows with k and the equalizer evaluates
  // these sums many thousands of times along one flow.
  static std::array<double, 3> eval_series(const Eigen::VectorXd& c, double th, bool reflect = false) {
    using L = long double;
    const L c1 = std::cos(L(th)), s1 = std::sin(L(th));
    L ck = 1, sk = 0, f = 0, df = 0, d2f = 0;
    for (int k = 0; k < c.size(); ++k) {
      const L ak = reflect && k % 2 ? -c[k] : c[k];
      f += ak * ck;
      df -= k * ak * sk;
      d2f -= L(k) * k * ak * ck;
      const L cn = ck * c1 - sk * s1, sn = sk * c1 + ck * s1;
      ck = cn;
      sk = sn;
    }
    return {double(f), double(df), double(d2f)};
  }

  // Doubled grid phi_i = (i + 1/2) h, i = 0..2N-1, value index folds back by evenness.
  int fold(int i) const {
    i = ((i % (2 * N_)) + 2 * N_) % (2 * N_);
    return i < N_ ? i : 2 * N_ - 1 - i;
  }

  std::array<double, 3> eval_spline(const Eigen::VectorXd& v, const Eigen::VectorXd& m, double th) const {
    const double h = std::numbers::pi / N_;
    double x = th / h - 0.5;
    int i = static_cast<int>(std::floor(x));
    double t = x - i;
    const double f0 = v[fold(i)], f1 = v[fold(i + 1)], m0 = m[fold(i)], m1 = m[fold(i + 1)];
    const double A = 1 - t, B = t;
    const double f = A * f0 + B * f1 + ((A * A * A - A) * m0 + (B * B * B - B) * m1) * h * h / 6;
    const double df = (f1 - f0) / h + (-(3 * A * A - 1) * m0 + (3 * B * B - 1) * m1) * h / 6;
    const double d2f = A * m0 + B * m1;
    return {f, df, d2f};
  }

  // Closed-form Fourier differentiation on the doubled uniform grid, folded by evenness.
  // Diagonals follow from exact annihilation of constants.
  void build_fourier() {
    const int M = 2 * N_;
    const double h = std::numbers::pi / N_;
    auto D1 = [&](int i, int l) {
      if (i == l) return 0.0;
      const double sg = ((i - l) % 2 == 0) ? 1.0 : -1.0;
      return 0.5 * sg / std::tan((i - l) * h / 2);
    };
    auto D2 = [&](int i, int l) {
      if (i == l) return -std::numbers::pi * std::numbers::pi / (3 * h * h) - 1.0 / 6;
      const double sg = ((i - l) % 2 == 0) ? 1.0 : -1.0;
      const double sn = std::sin((i - l) * h / 2);
      return -0.5 * sg / (sn * sn);
    };
    d1_.resize(N_, N_);
    d2_.resize(N_, N_);
    for (int j = 0; j < N_; ++j) {
      double r1 = 0, r2 = 0;
      for (int k = 0; k < N_; ++k) {
        if (k == j) continue;
        d1_(j, k) = D1(j, k) + D1(j, M - 1 - k);
        d2_(j, k) = D2(j, k) + D2(j, M - 1 - k);
        r1 += d1_(j, k);
        r2 += d2_(j, k);
      }
      d1_(j, j) = -r1;
      d2_(j, j) = -r2;
    }
  }

  void build_spline() {
    const int M = 2 * N_;
    const double h = std::numbers::pi / N_;
    Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(M, M);
    for (int i = 0; i < M; ++i) {
      sys(i, (i + M - 1) % M) += 1;
      sys(i, i) += 4;
      sys(i, (i + 1) % M) += 1;
    }
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(M, N_);
    for (int i = 0; i < M; ++i) {
      rhs(i, fold(i - 1)) += 6 / (h * h);
      rhs(i, fold(i)) -= 12 / (h * h);
      rhs(i, fold(i + 1)) += 6 / (h * h);
    }
    const Eigen::MatrixXd mom = sys.partialPivLu().solve(rhs);
    spline_m_ = mom.topRows(N_);
    d1_.resize(N_, N_);
    d2_ = spline_m_;
    Eigen::VectorXd e = Eigen::VectorXd::Zero(N_);
    for (int k = 0; k < N_; ++k) {
      e.setZero();
      e[k] = 1;
      const Eigen::VectorXd m = spline_m_ * e;
      for (int j = 0; j < N_; ++j) d1_(j, k) = eval_spline(e, m, theta_[j])[1];
    }
  }

  void build_weights() {
    w_.resize(N_);
    const double pi = std::numbers::pi;
    if (n_ % 2 == 1) {
      // sin^{n-1} is a cosine polynomial: the midpoint rule in theta is exact to high degree.
      for (int j = 0; j < N_; ++j) w_[j] = pi / N_ * std::pow(sin_[j], n_ - 1);
    } else {
      // Fejer's first rule in x = cos(theta) against (1 - x^2)^{(n-2)/2}.
      for (int j = 0; j < N_; ++j) {
        double s = 0;
        for (int k = 1; k <= N_ / 2; ++k) s += std::cos(2 * k * theta_[j]) / (4.0 * k * k - 1);
        const double v = 2.0 / N_ * (1 - 2 * s);
        w_[j] = v * std::pow(sin_[j] * sin_[j], 0.5 * (n_ - 2));
      }
    }
  }

  int n_, N_;
  DiffMethod method_;
  Eigen::VectorXd theta_, sin_, cos_, w_;
  Eigen::MatrixXd coef_, synth_, d1_, d2_, spline_m_;
};

using GridPtr = std::shared_ptr<const AngularGrid>;

// Axisymmetric function sampled at the grid nodes.
class AxiFunction {
 public:
  AxiFunction() = default;
  AxiFunction(GridPtr g, Eigen::VectorXd v) : g_(std::move(g)), v_(std::move(v)) {
    if (v_.size() != g_->size()) throw std::invalid_argument("AxiFunction: size mismatch");
  }

  template <class F>
  static AxiFunction from(GridPtr g, F&& f) {
    Eigen::VectorXd v(g->size());
    for (int j = 0; j < g->size(); ++j) v[j] = f(g->theta()[j]);
    return AxiFunction(std::move(g), std::move(v));
  }

  static AxiFunction constant(GridPtr g, double c) {
    const int N = g->size();
    return AxiFunction(std::move(g), Eigen::VectorXd::Constant(N, c));
  }

  // Cosine series sum_k c_k cos(k theta).
  static AxiFunction cosine_series(GridPtr g, const std::vector<double>& c) {
    return from(std::move(g), [&](double th) {
      double s = 0;
      for (std::size_t k = 0; k < c.size(); ++k) s += c[k] * std::cos(k * th);
      return s;
    });
  }

  const GridPtr& grid() const { return g_; }
  const Eigen::VectorXd& values() const { return v_; }
  int size() const { return static_cast<int>(v_.size()); }
  double operator[](int j) const { return v_[j]; }

  Eigen::VectorXd d1() const { return g_->diff1(v_); }
  Eigen::VectorXd d2() const { return g_->diff2(v_); }

  double operator()(double th) const { return g_->eval(v_, th)[0]; }
  std::array<double, 3> jet(double th) const { return g_->eval(v_, th); }

  double min() const { return v_.minCoeff(); }
  double max() const { return v_.maxCoeff(); }

 private:
  GridPtr g_;
  Eigen::VectorXd v_;
};

}  // namespace bhdata
