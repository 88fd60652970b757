#pragma once

#include "chlab/modulation.hpp"
#include "chlab/operators.hpp"
#include "chlab/solver.hpp"

namespace chlab {

/// Coefficients of the limiting remainder equation around phi_{c0}.
///
/// y(eta) and a(eta) are single pairings with precomputed fields. mu and b
/// use sigma seen from the frame moving at speed c0, sigma(. + c0 t), so they
/// are constant only when sigma is.
class LimitCoefficients {
 public:
  LimitCoefficients(const Modulator& mod, const Field& sigma);

  double y(const Field& eta) const { return inner(eta, y_field_); }
  double a(const Field& eta) const { return inner(eta, a_field_); }
  double mu(double t) const;
  double b(double t) const;
  /// sigma_t phi' + mu(t) phi' - b(t) d_c phi.
  Field jump_coefficient(double t) const;

  const Field& y_field() const { return y_field_; }
  const Field& a_field() const { return a_field_; }
  bool time_constant() const { return constant_sigma_; }
  double c0() const { return c0_; }

  /// 1/2 (1 - d^2)^{-1} d/dx L_{c0} eta.
  Field linear_drift(const Field& eta) const;
  /// Full limit drift at time t, including the compensator -sum_i w_i z_i J(t).
  Field drift(double t, const Field& eta, double first_moment) const;

 private:
  Field sigma_at(double t) const;

  double c0_;
  Field sigma_;
  bool constant_sigma_;
  LinearizedOperator op_;
  Field dphi_;
  Field dphi_dc_;
  Field w1_;
  Field w2_;
  double a11_;
  double dc_w2_;  // (d_c phi, w2)
  Field y_field_;
  Field a_field_;
};

LimitCoefficients limit_coeffs(const Modulator& mod, const Field& sigma);

/// Limit equation from eta(0) = 0 driven by the path with marks scaled by
/// eps_scale; same time grid and recording as the full solver.
Trajectory evolve_eta(const NoisePath& path, double eps_scale, const LimitCoefficients& limit,
                      const SolverConfig& config);

/// max_t max(|(eta, w1)|, |(eta, w2)|) / (max_t ||eta||_{L2} * max(||w1||, ||w2||)); 0 for eta = 0.
double orthogonality_drift(const Trajectory& eta_traj, const Modulator& mod);

/// sup over tracked rows before exit (t <= T) of ||eta_eps - eta||_{L2}.
/// Rows are matched on time and event index.
double compare_remainder(const ModulationTrack& tr, const Trajectory& eta_traj, double T);

/// Sup-discrepancies on the rows used by compare_remainder: remainder in L2
/// and |mu_eps - mu(t)|, |b_eps - b(t)|, |y_eps - y(eta)|, |a_eps - a(eta)|.
struct CouplingStats {
  double sup_l2 = 0.0;
  double d_mu = 0.0;
  double d_b = 0.0;
  double d_y = 0.0;
  double d_a = 0.0;
};
CouplingStats coupled_discrepancy(const ModulationTrack& tr, const Trajectory& eta_traj,
                                  const LimitCoefficients& limit, double T);

}  // namespace chlab
