#include "chlab/soliton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace chlab {

SolitonParams::SolitonParams(double speed, double dispersion) : c(speed), k(dispersion) {
  if (!(k > 0.0)) throw std::invalid_argument("soliton needs k > 0");
  if (!(c > 2.0 * k)) {
    std::ostringstream msg;
    msg << "smooth soliton needs c > 2k (c=" << c << ", k=" << k << ")";
    throw std::invalid_argument(msg.str());
  }
}

double SolitonParams::decay_rate() const { return std::sqrt(1.0 - 2.0 * k / c); }

namespace {

struct ParametricConstants {
  double s;       // sqrt(1 - 2k/c)
  double theta0;  // atanh(s)
  double ratio;   // 2k/c
  double peak;    // c - 2k
};

ParametricConstants constants(const SolitonParams& p) {
  const double s = p.decay_rate();
  return {s, std::atanh(s), 2.0 * p.k / p.c, p.peak()};
}

double x_of_theta(const ParametricConstants& pc, double theta) {
  return 2.0 * theta / pc.s + std::log(std::cosh(theta - pc.theta0) / std::cosh(theta + pc.theta0));
}

double dx_dtheta(const ParametricConstants& pc, double theta) {
  return 2.0 / pc.s + std::tanh(theta - pc.theta0) - std::tanh(theta + pc.theta0);
}

double u_of_theta(const ParametricConstants& pc, double theta) {
  const double sh = std::sinh(theta);
  return pc.peak / (1.0 + pc.ratio * sh * sh);
}

double theta_max(const ParametricConstants& pc) {
  // u(theta_max) = 1e-16 * peak
  return std::asinh(std::sqrt((1e16 - 1.0) / pc.ratio));
}

// Solves x(theta) = x for x >= 0. The map is increasing and convex on
// theta >= 0, so starting from an upper bound Newton decreases monotonically;
// the bracket only guards against round-off.
double invert(const ParametricConstants& pc, double x, double theta_hi) {
  if (x == 0.0) return 0.0;
  double lo = 0.0;
  double hi = theta_hi;
  const double slope0 = dx_dtheta(pc, 0.0);
  double theta = std::min({x / slope0, 0.5 * pc.s * (x + 2.0 * pc.theta0), hi});
  const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, x);
  for (int it = 0; it < 100; ++it) {
    const double f = x_of_theta(pc, theta) - x;
    if (std::abs(f) <= tol) return theta;
    if (f > 0.0) {
      hi = theta;
    } else {
      lo = theta;
    }
    double next = theta - f / dx_dtheta(pc, theta);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - theta) <= 1e-16 * std::max(1.0, theta)) return next;
    theta = next;
  }
  throw Error("soliton parametric inversion did not converge at x=" + std::to_string(x));
}

}  // namespace

ParametricPoint parametric_point(const SolitonParams& p, double theta) {
  const auto pc = constants(p);
  return {x_of_theta(pc, theta), u_of_theta(pc, theta), dx_dtheta(pc, theta)};
}

double theta_max(const SolitonParams& p) { return theta_max(constants(p)); }

double profile_at(const SolitonParams& p, double x) {
  const auto pc = constants(p);
  const double ax = std::abs(x);
  const double tmax = theta_max(pc);
  if (ax >= x_of_theta(pc, tmax)) return 0.0;
  return u_of_theta(pc, invert(pc, ax, tmax));
}

Field sample_profile(const SolitonParams& p, const GridPtr& grid, double tail_tolerance) {
  const auto pc = constants(p);
  const double tmax = theta_max(pc);
  const double xmax = x_of_theta(pc, tmax);
  const double tail = profile_at(p, 0.5 * grid->length());
  if (tail > tail_tolerance) {
    std::ostringstream msg;
    msg << "domain too small: phi(L/2) = " << tail << " exceeds " << tail_tolerance << " (L=" << grid->length()
        << ", c=" << p.c << ", k=" << p.k << ")";
    throw DomainTooSmall(msg.str());
  }
  const int n = grid->size();
  const int half = n / 2;
  Eigen::ArrayXd v(n);
  // Nodes are symmetric about index N/2 (x = 0); node 0 sits at -L/2.
  for (int i = half; i < n; ++i) {
    const double ax = std::abs(grid->node(i));
    v[i] = ax >= xmax ? 0.0 : u_of_theta(pc, invert(pc, ax, tmax));
    if (i > half) v[n - i] = v[i];
  }
  v[0] = profile_at(p, grid->node(0));
  return Field(grid, std::move(v));
}

SolitonProfile build_profile(const SolitonParams& p, const GridPtr& grid, double tail_tolerance) {
  Field phi = sample_profile(p, grid, tail_tolerance);
  Field dphi_dx = deriv(phi, 1);

  auto central = [&](double delta) {
    const Field plus = sample_profile(SolitonParams(p.c + delta, p.k), grid, 1.0);
    const Field minus = sample_profile(SolitonParams(p.c - delta, p.k), grid, 1.0);
    return (plus - minus) / (2.0 * delta);
  };
  const Field coarse = central(1e-4);
  const Field fine = central(5e-5);
  Field dphi_dc = (4.0 * fine - coarse) / 3.0;
  return {p, std::move(phi), std::move(dphi_dx), std::move(dphi_dc)};
}

double ode_residual(const Field& phi, const SolitonParams& p) {
  const Field px = deriv(phi, 1);
  const Field pxx = deriv(phi, 2);
  const Eigen::ArrayXd& u = phi.values();
  const Eigen::ArrayXd r = -p.c * u + p.c * pxx.values() + 1.5 * u.square() + 2.0 * p.k * u -
                           u * pxx.values() - 0.5 * px.values().square();
  return r.abs().maxCoeff() / phi.max_abs();
}

double ode_residual(const SolitonProfile& profile) { return ode_residual(profile.phi, profile.params); }

// ---------------------------------------------------------------------------

ProfileCache::ProfileCache(GridPtr grid, double k, std::size_t capacity)
    : grid_(std::move(grid)), k_(k), capacity_(std::max<std::size_t>(capacity, 1)) {}

std::shared_ptr<const SolitonProfile> ProfileCache::get(double c) const {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(c);
    if (it != cache_.end()) return it->second;
  }
  auto built = std::make_shared<const SolitonProfile>(build_profile(SolitonParams(c, k_), grid_, 1.0));
  std::lock_guard<std::mutex> lock(mutex_);
  if (cache_.size() >= capacity_) {
    cache_.erase(order_.front());
    order_.erase(order_.begin());
  }
  if (cache_.emplace(c, built).second) order_.push_back(c);
  return built;
}

std::shared_ptr<const SolitonProfile> ProfileCache::find(double c) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cache_.find(c);
  return it == cache_.end() ? nullptr : it->second;
}

Field ProfileCache::phi(double c) const {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(c);
    if (it != cache_.end()) return it->second->phi;
  }
  return sample_profile(SolitonParams(c, k_), grid_, 1.0);
}

}  // namespace chlab
