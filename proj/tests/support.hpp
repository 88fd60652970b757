#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "chlab/grid.hpp"

namespace testsupport {

using chlab::Field;
using chlab::GridPtr;

/// Smooth periodic field: a few random low Fourier modes under a Gaussian
/// envelope, so everything is resolved on the grid.
inline Field random_smooth(const GridPtr& g, unsigned seed, double width = 6.0) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  double a[6], b[6];
  for (int m = 0; m < 6; ++m) a[m] = nd(rng), b[m] = nd(rng);
  const double centre = 4.0 * nd(rng);
  return Field::from_function(g, [&](double x) {
    double s = 0.0;
    for (int m = 0; m < 6; ++m) s += a[m] * std::cos(0.4 * m * x) + b[m] * std::sin(0.4 * m * x);
    const double r = (x - centre) / width;
    return s * std::exp(-r * r);
  });
}

/// Parametric soliton written out independently of the library.
struct Param {
  double c, k, s, th0, r;
  Param(double c_, double k_) : c(c_), k(k_), s(std::sqrt(1 - 2 * k_ / c_)), th0(std::atanh(s)), r(2 * k_ / c_) {}
  double x(double t) const { return 2 * t / s + std::log(std::cosh(t - th0)) - std::log(std::cosh(t + th0)); }
  double xt(double t) const { return 2 / s + std::tanh(t - th0) - std::tanh(t + th0); }
  double D(double t) const { return 1 + r * std::sinh(t) * std::sinh(t); }
  double u(double t) const { return (c - 2 * k) / D(t); }
  double ut(double t) const { return -(c - 2 * k) / (D(t) * D(t)) * r * 2 * std::sinh(t) * std::cosh(t); }
  /// u_x = u_theta / x_theta
  double ux(double t) const { return ut(t) / xt(t); }

  /// d phi / d c at fixed x, by implicit differentiation of x(theta; c) = const.
  double dphi_dc(double t) const {
    const double ds = (k / (c * c)) / s;
    const double dth0 = ds * c / (2 * k);
    const double xc = -2 * t / (s * s) * ds - (std::tanh(t - th0) + std::tanh(t + th0)) * dth0;
    const double sh2 = std::sinh(t) * std::sinh(t);
    const double uc = 1 / D(t) + (c - 2 * k) * (2 * k / (c * c)) * sh2 / (D(t) * D(t));
    return uc + ut(t) * (-xc / xt(t));
  }

  /// theta with x(theta) = |x|, by bisection.
  double theta_of(double xv) const {
    xv = std::abs(xv);
    double lo = 0, hi = 40;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (x(mid) < xv ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
};

/// 2 int_0^inf f(theta) x_theta d theta, for even integrands in x.
template <class F>
double theta_integral(const Param& p, F f) {
  using boost::math::quadrature::gauss_kronrod;
  auto g = [&](double t) { return f(t) * p.xt(t); };
  return 2.0 * gauss_kronrod<double, 61>::integrate(g, 0.0, 25.0, 15, 1e-14);
}

}  // namespace testsupport
