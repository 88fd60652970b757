#include "chlab/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

namespace chlab {

namespace {

// Planning is not thread-safe in FFTW; execution with the new-array API is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

GridPtr PeriodicGrid::create(double length, int n_points) {
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw std::invalid_argument("grid length must be positive and finite");
  }
  if (n_points < 16 || n_points % 2 != 0) {
    throw std::invalid_argument("grid needs an even number of points, at least 16 (got " +
                                std::to_string(n_points) + ")");
  }
  return GridPtr(new PeriodicGrid(length, n_points));
}

PeriodicGrid::PeriodicGrid(double length, int n_points) : length_(length), n_(n_points) {
  k_.resize(n_modes());
  for (int j = 0; j < n_modes(); ++j) k_[j] = 2.0 * std::numbers::pi * j / length_;

  std::lock_guard<std::mutex> lock(planner_mutex());
  std::vector<double> in(n_);
  std::vector<fftw_complex> out(n_modes());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plan_forward_ = fftw_plan_dft_r2c_1d(n_, in.data(), out.data(), flags);
  plan_inverse_ = fftw_plan_dft_c2r_1d(n_, out.data(), in.data(), flags | FFTW_DESTROY_INPUT);
}

PeriodicGrid::~PeriodicGrid() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_inverse_));
}

Eigen::ArrayXd PeriodicGrid::nodes() const {
  Eigen::ArrayXd x(n_);
  for (int i = 0; i < n_; ++i) x[i] = node(i);
  return x;
}

Eigen::ArrayXcd PeriodicGrid::forward(const Eigen::ArrayXd& values) const {
  Eigen::ArrayXd in = values;  // r2c does not modify input, but keep the API const-clean
  Eigen::ArrayXcd out(n_modes());
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_forward_), in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

Eigen::ArrayXd PeriodicGrid::inverse(Eigen::ArrayXcd modes) const {
  Eigen::ArrayXd out(n_);
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_inverse_),
                       reinterpret_cast<fftw_complex*>(modes.data()), out.data());
  out /= static_cast<double>(n_);
  return out;
}

// ---------------------------------------------------------------------------

Field::Field(GridPtr grid, Eigen::ArrayXd values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw std::invalid_argument("field needs a grid");
  if (values_.size() != grid_->size()) {
    throw std::invalid_argument("field size " + std::to_string(values_.size()) +
                                " does not match grid size " + std::to_string(grid_->size()));
  }
  if (!values_.isFinite().all()) throw NonFiniteField("field contains non-finite samples");
}

Field Field::zeros(GridPtr grid) {
  const int n = grid->size();
  return Field(std::move(grid), Eigen::ArrayXd::Zero(n));
}

Field Field::constant(GridPtr grid, double value) {
  const int n = grid->size();
  return Field(std::move(grid), Eigen::ArrayXd::Constant(n, value));
}

Field Field::from_function(GridPtr grid, const std::function<double(double)>& f) {
  Eigen::ArrayXd v(grid->size());
  for (int i = 0; i < grid->size(); ++i) v[i] = f(grid->node(i));
  return Field(std::move(grid), std::move(v));
}

void require_same_grid(const Field& a, const Field& b) {
  if (!a.grid().same_as(b.grid())) throw GridMismatch();
}

Field operator+(const Field& a, const Field& b) {
  require_same_grid(a, b);
  return a.with_values(a.values() + b.values());
}

Field operator-(const Field& a, const Field& b) {
  require_same_grid(a, b);
  return a.with_values(a.values() - b.values());
}

Field operator*(const Field& a, const Field& b) {
  require_same_grid(a, b);
  return a.with_values(a.values() * b.values());
}

Field operator*(double s, const Field& a) { return a.with_values(s * a.values()); }
Field operator*(const Field& a, double s) { return a.with_values(s * a.values()); }
Field operator/(const Field& a, double s) { return a.with_values(a.values() / s); }
Field operator-(const Field& a) { return a.with_values(-a.values()); }
Field operator+(double s, const Field& a) { return a.with_values(s + a.values()); }
Field operator+(const Field& a, double s) { return a.with_values(a.values() + s); }
Field operator-(double s, const Field& a) { return a.with_values(s - a.values()); }
Field operator-(const Field& a, double s) { return a.with_values(a.values() - s); }

// ---------------------------------------------------------------------------

Spectrum::Spectrum(const Field& f) : grid_(f.grid_ptr()), modes_(f.grid().forward(f.values())) {}

Spectrum::Spectrum(GridPtr grid, Eigen::ArrayXcd modes) : grid_(std::move(grid)), modes_(std::move(modes)) {}

Spectrum Spectrum::derivative(int order) const {
  if (order < 1 || order > 3) {
    throw std::invalid_argument("derivative order must be 1, 2 or 3 (got " + std::to_string(order) + ")");
  }
  const Eigen::ArrayXd& k = grid_->wavenumbers();
  Eigen::ArrayXcd out(modes_.size());
  const std::complex<double> i1(0.0, 1.0);
  std::complex<double> unit = 1.0;
  for (int p = 0; p < order; ++p) unit *= i1;
  for (Eigen::Index j = 0; j < modes_.size(); ++j) out[j] = unit * std::pow(k[j], order) * modes_[j];
  if (order % 2 == 1) out[out.size() - 1] = 0.0;
  return {grid_, std::move(out)};
}

Spectrum Spectrum::helmholtz_inverse() const {
  const Eigen::ArrayXd& k = grid_->wavenumbers();
  return {grid_, modes_ / (1.0 + k.square())};
}

Spectrum Spectrum::helmholtz() const {
  const Eigen::ArrayXd& k = grid_->wavenumbers();
  return {grid_, modes_ * (1.0 + k.square())};
}

Spectrum Spectrum::shifted(double a) const {
  const Eigen::ArrayXd& k = grid_->wavenumbers();
  Eigen::ArrayXcd out(modes_.size());
  for (Eigen::Index j = 0; j + 1 < modes_.size(); ++j) out[j] = modes_[j] * std::polar(1.0, -k[j] * a);
  const Eigen::Index ny = modes_.size() - 1;
  out[ny] = modes_[ny] * std::cos(k[ny] * a);
  return {grid_, std::move(out)};
}

Spectrum Spectrum::truncated() const {
  Eigen::ArrayXcd out = modes_;
  const int cut = grid_->dealias_cutoff();
  for (Eigen::Index j = cut + 1; j < out.size(); ++j) out[j] = 0.0;
  return {grid_, std::move(out)};
}

Field Spectrum::to_field() const { return Field(grid_, grid_->inverse(modes_)); }

Spectrum operator+(const Spectrum& a, const Spectrum& b) {
  if (!a.grid_->same_as(*b.grid_)) throw GridMismatch();
  return {a.grid_, a.modes_ + b.modes_};
}

Spectrum operator-(const Spectrum& a, const Spectrum& b) {
  if (!a.grid_->same_as(*b.grid_)) throw GridMismatch();
  return {a.grid_, a.modes_ - b.modes_};
}

Spectrum operator*(double s, const Spectrum& a) { return {a.grid_, s * a.modes_}; }

// ---------------------------------------------------------------------------

Field deriv(const Field& f, int order) { return Spectrum(f).derivative(order).to_field(); }

Field helmholtz_inv(const Field& f) { return Spectrum(f).helmholtz_inverse().to_field(); }

Field helmholtz(const Field& f) { return Spectrum(f).helmholtz().to_field(); }

Field shift(const Field& f, double a) {
  if (a == 0.0) return f;
  return Spectrum(f).shifted(a).to_field();
}

Field dealias(const Field& f) { return Spectrum(f).truncated().to_field(); }

Field dealiased_product(const Field& a, const Field& b) {
  require_same_grid(a, b);
  return dealias(dealias(a) * dealias(b));
}

double inner(const Field& f, const Field& g) {
  require_same_grid(f, g);
  return f.grid().dx() * (f.values() * g.values()).sum();
}

double l2_norm(const Field& f) { return std::sqrt(inner(f, f)); }

double h1_inner(const Field& f, const Field& g) {
  require_same_grid(f, g);
  return inner(f, g) + inner(deriv(f, 1), deriv(g, 1));
}

double h1_norm(const Field& f) { return std::sqrt(h1_inner(f, f)); }

// ---------------------------------------------------------------------------

TrigInterpolant::TrigInterpolant(const Field& f, double relative_cutoff)
    : origin_(f.grid().node(0)), base_(2.0 * std::numbers::pi / f.grid().length()) {
  const Eigen::ArrayXcd modes = f.grid().forward(f.values());
  const double n = f.grid().size();
  const Eigen::Index ny = modes.size() - 1;
  mean_ = modes[0].real() / n;
  std::vector<std::complex<double>> dense(modes.size(), 0.0);
  double biggest = 0.0;
  for (Eigen::Index j = 1; j <= ny; ++j) {
    dense[j] = (j == ny ? 1.0 : 2.0) * modes[j] / n;
    biggest = std::max(biggest, std::abs(dense[j]));
  }
  int last = 0;
  for (Eigen::Index j = 1; j <= ny; ++j) {
    if (std::abs(dense[j]) > relative_cutoff * biggest) last = static_cast<int>(j);
  }
  re_.assign(last, 0.0);
  im_.assign(last, 0.0);
  for (int j = 1; j <= last; ++j) {
    re_[j - 1] = dense[j].real();
    im_[j - 1] = dense[j].imag();
  }
}

double TrigInterpolant::operator()(double x) const {
  const double theta = base_ * (x - origin_);
  const double sr = std::cos(theta);
  const double si = std::sin(theta);
  double pr = sr;
  double pi = si;
  double acc = mean_;
  const std::size_t m = re_.size();
  for (std::size_t j = 0; j < m; ++j) {
    // Resynchronise the recurrence periodically to bound round-off growth.
    if (j % 32 == 31) {
      pr = std::cos(theta * static_cast<double>(j + 1));
      pi = std::sin(theta * static_cast<double>(j + 1));
    }
    acc += re_[j] * pr - im_[j] * pi;
    const double nr = pr * sr - pi * si;
    pi = pr * si + pi * sr;
    pr = nr;
  }
  return acc;
}

}  // namespace chlab
