#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "chlab/grid.hpp"

namespace chlab {

/// Speed c and dispersion k of a smooth solitary wave. Requires k > 0 and
/// c > 2k (which also gives c > k).
struct SolitonParams {
  double c;
  double k;

  SolitonParams(double speed, double dispersion);

  double peak() const { return c - 2.0 * k; }
  /// Exponential decay rate sqrt(1 - 2k/c) of the tails.
  double decay_rate() const;
};

/// Sampled solitary wave with its x- and c-derivatives.
struct SolitonProfile {
  SolitonParams params;
  Field phi;
  Field dphi_dx;
  Field dphi_dc;
};

/// Largest admissible |phi(+-L/2)| when sampling on a periodic box.
inline constexpr double kDefaultTailTolerance = 1e-9;

/// Points of the parametric curve theta -> (x(theta), u(theta)) at t = 0.
struct ParametricPoint {
  double x;
  double u;
  double dx_dtheta;
};
ParametricPoint parametric_point(const SolitonParams& p, double theta);

/// Largest theta used by the inversion; beyond it the profile is returned as 0.
double theta_max(const SolitonParams& p);

/// phi_c(x) by inverting the monotone parametric map with a safeguarded Newton
/// iteration. Throws Error if the iteration does not converge.
double profile_at(const SolitonParams& p, double x);

/// Samples phi_c on a grid without derivatives. Throws DomainTooSmall when the
/// tail at +-L/2 exceeds `tail_tolerance`.
Field sample_profile(const SolitonParams& p, const GridPtr& grid, double tail_tolerance = kDefaultTailTolerance);

/// phi_c, its spectral x-derivative and a Richardson-extrapolated central
/// difference in c (steps 1e-4 and 5e-5).
SolitonProfile build_profile(const SolitonParams& p, const GridPtr& grid,
                             double tail_tolerance = kDefaultTailTolerance);

/// max |-c phi + c phi'' + 3/2 phi^2 + 2k phi - phi phi'' - 1/2 phi'^2| / max|phi|.
double ode_residual(const Field& phi, const SolitonParams& p);
double ode_residual(const SolitonProfile& profile);

/// Thread-safe memo of built profiles keyed on the exact speed.
class ProfileCache {
 public:
  ProfileCache(GridPtr grid, double k, std::size_t capacity = 64);

  std::shared_ptr<const SolitonProfile> get(double c) const;
  /// Cached profile at exactly c, or null.
  std::shared_ptr<const SolitonProfile> find(double c) const;
  /// Profile without the c-derivative (the dphi_dc field is left zero).
  Field phi(double c) const;

  const GridPtr& grid() const { return grid_; }
  double k() const { return k_; }

 private:
  GridPtr grid_;
  double k_;
  std::size_t capacity_;
  mutable std::mutex mutex_;
  mutable std::map<double, std::shared_ptr<const SolitonProfile>> cache_;
  mutable std::vector<double> order_;
};

}  // namespace chlab
