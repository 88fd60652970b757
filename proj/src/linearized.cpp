#include "chlab/linearized.hpp"

#include <cmath>

#include "chlab/operators.hpp"

namespace chlab {

LimitCoefficients::LimitCoefficients(const Modulator& mod, const Field& sigma)
    : c0_(mod.c0()),
      sigma_(sigma),
      constant_sigma_(is_constant(sigma)),
      op_(LinearizedOperator::from_profile(mod.reference())),
      dphi_(mod.reference().dphi_dx),
      dphi_dc_(mod.reference().dphi_dc),
      w1_(mod.w1()),
      w2_(mod.w2()),
      a11_(inner(dphi_, w1_)),
      dc_w2_(inner(dphi_dc_, w2_)),
      y_field_(apply_Lc(op_, deriv(dphi_, 1)) / (2.0 * a11_)),
      a_field_(apply_Lc(op_, dphi_) / (-2.0 * dc_w2_)) {
  require_same_grid(sigma, dphi_);
  if (!(std::abs(a11_) > 0.0) || !(std::abs(dc_w2_) > 0.0)) throw Error("degenerate limit coefficients");
}

Field LimitCoefficients::sigma_at(double t) const {
  if (constant_sigma_ || t == 0.0) return sigma_;
  return shift(sigma_, -c0_ * t);
}

double LimitCoefficients::mu(double t) const { return -inner(sigma_at(t) * dphi_, w1_) / a11_; }

double LimitCoefficients::b(double t) const { return inner(sigma_at(t) * dphi_, w2_) / dc_w2_; }

Field LimitCoefficients::jump_coefficient(double t) const {
  const Field sp = sigma_at(t) * dphi_;
  const double m = -inner(sp, w1_) / a11_;
  const double bb = inner(sp, w2_) / dc_w2_;
  return sp + m * dphi_ - bb * dphi_dc_;
}

Field LimitCoefficients::linear_drift(const Field& eta) const {
  return 0.5 * helmholtz_inv(deriv(apply_Lc(op_, eta), 1));
}

Field LimitCoefficients::drift(double t, const Field& eta, double first_moment) const {
  Field f = linear_drift(eta) + y(eta) * dphi_ - a(eta) * dphi_dc_;
  if (first_moment != 0.0) f = f - first_moment * jump_coefficient(t);
  return f;
}

LimitCoefficients limit_coeffs(const Modulator& mod, const Field& sigma) { return LimitCoefficients(mod, sigma); }

Trajectory evolve_eta(const NoisePath& path, double eps_scale, const LimitCoefficients& limit,
                      const SolverConfig& config) {
  const NoisePath scaled = eps_scale == 1.0 ? path : path.scaled(eps_scale);
  const double m1 = scaled.measure.first_moment();
  auto rhs = [&](double t, const Field& eta) { return limit.drift(t, eta, m1); };
  auto jump = [&](double t, const Field& eta, double z) { return eta + z * limit.jump_coefficient(t); };
  Trajectory traj =
      integrate_events(Field::zeros(limit.y_field().grid_ptr()), scaled, 0.0, config, rhs, jump);
  traj.noise = path;
  traj.epsilon = eps_scale;
  return traj;
}

double orthogonality_drift(const Trajectory& eta_traj, const Modulator& mod) {
  double worst = 0.0;
  double scale = 0.0;
  for (const Field& eta : eta_traj.states) {
    worst = std::max({worst, std::abs(inner(eta, mod.w1())), std::abs(inner(eta, mod.w2()))});
    scale = std::max(scale, l2_norm(eta));
  }
  if (scale == 0.0) return 0.0;
  return worst / (scale * std::max(l2_norm(mod.w1()), l2_norm(mod.w2())));
}

namespace {

std::vector<std::pair<std::size_t, std::size_t>> matched_rows(const ModulationTrack& tr, const Trajectory& eta_traj,
                                                              double T) {
  std::vector<std::pair<std::size_t, std::size_t>> rows;
  std::size_t j = 0;
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    if (tr.exited[i] || tr.times[i] > T) break;
    while (j < eta_traj.times.size() &&
           (eta_traj.times[j] < tr.times[i] ||
            (eta_traj.times[j] == tr.times[i] && eta_traj.event_index[j] != tr.event_index[i]))) {
      ++j;
    }
    if (j >= eta_traj.times.size() || eta_traj.times[j] != tr.times[i]) {
      throw std::invalid_argument("track and limit trajectory are not on the same time grid");
    }
    rows.emplace_back(i, j);
  }
  return rows;
}

}  // namespace

double compare_remainder(const ModulationTrack& tr, const Trajectory& eta_traj, double T) {
  double sup = 0.0;
  for (const auto& [i, j] : matched_rows(tr, eta_traj, T)) {
    sup = std::max(sup, l2_norm(tr.states[i].eta - eta_traj.states[j]));
  }
  return sup;
}

CouplingStats coupled_discrepancy(const ModulationTrack& tr, const Trajectory& eta_traj,
                                  const LimitCoefficients& limit, double T) {
  if (tr.coeffs.size() != tr.states.size()) throw std::invalid_argument("coupled_discrepancy needs coefficients");
  CouplingStats s;
  for (const auto& [i, j] : matched_rows(tr, eta_traj, T)) {
    const Field& eta = eta_traj.states[j];
    const auto& co = tr.coeffs[i];
    const double t = tr.times[i];
    s.sup_l2 = std::max(s.sup_l2, l2_norm(tr.states[i].eta - eta));
    s.d_mu = std::max(s.d_mu, std::abs(co.mu - limit.mu(t)));
    s.d_b = std::max(s.d_b, std::abs(co.b - limit.b(t)));
    s.d_y = std::max(s.d_y, std::abs(co.y - limit.y(eta)));
    s.d_a = std::max(s.d_a, std::abs(co.a - limit.a(eta)));
  }
  return s;
}

}  // namespace chlab
