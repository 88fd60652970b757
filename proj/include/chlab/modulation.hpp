#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chlab/solver.hpp"
#include "chlab/soliton.hpp"

namespace chlab {

struct ModulationState {
  double c = 0.0;
  double x = 0.0;  // unwrapped
  /// Remainder in the co-moving frame, (u(. + x) - phi_c) / eps; the raw
  /// remainder when eps = 0.
  Field eta;
  /// (eta, w1) and (eta, w2).
  std::array<double, 2> residuals{};
  int iterations = 0;
};

/// A (mu, b)^T = D and A (y, a)^T = E.
struct ModulationSystem {
  Eigen::Matrix2d A;
  Eigen::Vector2d D;
  Eigen::Vector2d E;
};

struct ModulationCoefficients {
  double y = 0.0;
  double a = 0.0;
  double b = 0.0;
  double mu = 0.0;
  Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
  double detA = 0.0;
};

/// Orthogonal decomposition u(. + x) = phi_c + eps eta with
/// (eta, w1) = (eta, w2) = 0, w1 = (1 - d^2) phi'_{c0}, w2 = (1 - d^2) phi_{c0}.
class Modulator {
 public:
  Modulator(GridPtr grid, double c0, double k);

  double c0() const { return c0_; }
  double k() const { return k_; }
  const GridPtr& grid() const { return grid_; }
  const SolitonProfile& reference() const { return *ref_; }
  const Field& w1() const { return w1_; }
  const Field& w2() const { return w2_; }
  const ProfileCache& cache() const { return cache_; }

  /// A at eps = 0, c = c0.
  const Eigen::Matrix2d& A0() const { return A0_; }
  /// 1e-8 ||A0||.
  double tol_sing() const { return 1e-8 * A0_.norm(); }

  /// Newton on (x, c) from the guess. The c-column of the Jacobian uses
  /// `jacobian_profile` (phi at c0 when null). Throws ModulationBreakdown after
  /// 50 iterations or when c - 2k drops below a tenth of c0 - 2k.
  ModulationState extract(const Field& u, double eps, double c_guess, double x_guess,
                          const SolitonProfile* jacobian_profile = nullptr) const;

  /// Assembles A, D, E at the state with sigma already moved to the frame.
  ModulationSystem assemble_system(const ModulationState& state, double eps, const Field& sigma_frame) const;

 private:
  GridPtr grid_;
  double c0_;
  double k_;
  ProfileCache cache_;
  std::shared_ptr<const SolitonProfile> ref_;
  Field w1_;
  Field w2_;
  Eigen::ArrayXcd w1_hat_;
  Eigen::ArrayXcd w2_hat_;
  Eigen::Matrix2d A0_;
};

/// Solves both 2x2 systems. Throws ModulationBreakdown when |det A| <= tol_sing.
ModulationCoefficients solve_coeffs(const ModulationSystem& sys, double tol_sing);

/// sigma(. + x) on the grid.
Field sigma_in_frame(const Field& sigma, double x);

struct ModulationTrack {
  std::vector<double> times;
  std::vector<ModulationState> states;
  std::vector<ModulationCoefficients> coeffs;  // empty when not requested
  std::vector<int> event_index;
  std::vector<bool> exited;
  std::optional<double> exit_time;
  std::string exit_reason;
  double alpha = 0.0;
  double epsilon = 0.0;
};

/// Extracts (and optionally solves for coefficients) at every recorded time
/// until ||eps eta||_{H1} > alpha, |c - c0| > alpha or a breakdown. The exit
/// row, when extraction succeeded, is kept with exited = true.
ModulationTrack track(const Trajectory& traj, const Modulator& mod, double alpha, const Field& sigma,
                      bool with_coefficients = true);

/// Max cumulative mismatch between the tracked (x, c) and the trapezoid
/// quadrature of dx = (c + eps y - eps mu m1) dt, dc = (eps a - eps b m1) dt
/// (m1 = sum w z), with jumps eps z (mu_- + mu_+)/2 and eps z (b_- + b_+)/2.
std::pair<double, double> parameter_residual(const ModulationTrack& tr, const NoisePath& path, double eps);

/// Columns t, c_eps, x_eps, h1_norm_eta, y_eps, a_eps, b_eps, mu_eps, detA, exited.
void write_track_csv(const ModulationTrack& tr, const std::string& file);

}  // namespace chlab
