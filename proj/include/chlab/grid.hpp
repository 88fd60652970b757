#pragma once

#include <Eigen/Core>

#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "chlab/errors.hpp"

namespace chlab {

class PeriodicGrid;
using GridPtr = std::shared_ptr<const PeriodicGrid>;

/// Uniform periodic grid on [-L/2, L/2) with N nodes.
///
/// Owns the FFT plans used by every spectral operation on fields that live on
/// it. Plans are created once and executed through the new-array interface, so
/// a grid can be shared freely between threads.
class PeriodicGrid {
 public:
  /// N must be even and at least 16; L must be positive.
  static GridPtr create(double length, int n_points);

  double length() const { return length_; }
  int size() const { return n_; }
  double dx() const { return length_ / n_; }
  double node(int i) const { return -0.5 * length_ + i * dx(); }
  Eigen::ArrayXd nodes() const;

  /// Number of complex modes of the real transform, N/2 + 1.
  int n_modes() const { return n_ / 2 + 1; }
  /// Angular wavenumbers 2*pi*j/L for j = 0..N/2.
  const Eigen::ArrayXd& wavenumbers() const { return k_; }
  /// Highest mode index kept by the 2/3 rule.
  int dealias_cutoff() const { return n_ / 3; }

  /// Unnormalised forward real-to-complex transform.
  Eigen::ArrayXcd forward(const Eigen::ArrayXd& values) const;
  /// Normalised inverse (forward followed by inverse is the identity).
  Eigen::ArrayXd inverse(Eigen::ArrayXcd modes) const;

  bool same_as(const PeriodicGrid& other) const {
    return this == &other || (n_ == other.n_ && length_ == other.length_);
  }

  ~PeriodicGrid();
  PeriodicGrid(const PeriodicGrid&) = delete;
  PeriodicGrid& operator=(const PeriodicGrid&) = delete;

 private:
  PeriodicGrid(double length, int n_points);

  double length_;
  int n_;
  Eigen::ArrayXd k_;
  void* plan_forward_ = nullptr;
  void* plan_inverse_ = nullptr;
};

/// Real samples of a periodic function. Immutable once built.
class Field {
 public:
  /// Throws NonFiniteField if any sample is NaN or infinite.
  Field(GridPtr grid, Eigen::ArrayXd values);

  static Field zeros(GridPtr grid);
  static Field constant(GridPtr grid, double value);
  static Field from_function(GridPtr grid, const std::function<double(double)>& f);

  const PeriodicGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Eigen::ArrayXd& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_[i]; }
  double max_abs() const { return values_.abs().maxCoeff(); }

  /// Same grid, new samples.
  Field with_values(Eigen::ArrayXd values) const { return Field(grid_, std::move(values)); }

 private:
  GridPtr grid_;
  Eigen::ArrayXd values_;
};

void require_same_grid(const Field& a, const Field& b);

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(const Field& a, const Field& b);
Field operator*(double s, const Field& a);
Field operator*(const Field& a, double s);
Field operator/(const Field& a, double s);
Field operator-(const Field& a);
Field operator+(double s, const Field& a);
Field operator+(const Field& a, double s);
Field operator-(double s, const Field& a);
Field operator-(const Field& a, double s);

/// Fourier coefficients of a field, with the calculus done as multipliers.
class Spectrum {
 public:
  explicit Spectrum(const Field& f);
  Spectrum(GridPtr grid, Eigen::ArrayXcd modes);

  const Eigen::ArrayXcd& modes() const { return modes_; }
  const GridPtr& grid_ptr() const { return grid_; }

  /// order-th derivative; odd orders drop the Nyquist mode.
  Spectrum derivative(int order) const;
  /// Multiplier 1/(1+k^2).
  Spectrum helmholtz_inverse() const;
  /// Multiplier 1+k^2.
  Spectrum helmholtz() const;
  /// Multiplier exp(-i k a); the Nyquist mode gets cos(k a).
  Spectrum shifted(double a) const;
  /// Zero every mode above N/3.
  Spectrum truncated() const;

  Field to_field() const;

  friend Spectrum operator+(const Spectrum& a, const Spectrum& b);
  friend Spectrum operator-(const Spectrum& a, const Spectrum& b);
  friend Spectrum operator*(double s, const Spectrum& a);

 private:
  GridPtr grid_;
  Eigen::ArrayXcd modes_;
};

/// Spectral derivative; order must be 1, 2 or 3.
Field deriv(const Field& f, int order);
/// Solves (1 - d^2/dx^2) g = f.
Field helmholtz_inv(const Field& f);
/// Applies (1 - d^2/dx^2).
Field helmholtz(const Field& f);
/// Samples of x -> f(x - a).
Field shift(const Field& f, double a);
/// 2/3-rule low-pass filter.
Field dealias(const Field& f);
/// Pointwise product of the 2/3-filtered factors, filtered again.
Field dealiased_product(const Field& a, const Field& b);

/// Rectangle-rule L2 pairing dx * sum f_i g_i.
double inner(const Field& f, const Field& g);
double l2_norm(const Field& f);
double h1_inner(const Field& f, const Field& g);
double h1_norm(const Field& f);

/// Evaluates the trigonometric interpolant of a field at arbitrary points.
/// Modes above the last one exceeding relative_cutoff * (largest mode) are
/// dropped before evaluation.
class TrigInterpolant {
 public:
  explicit TrigInterpolant(const Field& f, double relative_cutoff = 1e-15);
  double operator()(double x) const;
  std::size_t active_modes() const { return re_.size(); }

 private:
  double origin_;
  double base_;  // 2*pi/L
  double mean_;
  std::vector<double> re_;
  std::vector<double> im_;
};

}  // namespace chlab
