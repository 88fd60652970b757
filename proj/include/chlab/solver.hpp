#pragma once

#include <functional>
#include <string>
#include <vector>

#include "chlab/grid.hpp"
#include "chlab/noise.hpp"

namespace chlab {

struct SolverConfig {
  double dt = 1e-3;
  int record_every = 10;
  bool dealias = true;
  /// Largest allowed (max|u| + 2k) dt / dx.
  double cfl_guard = 0.45;

  /// Throws ConfigError on dt <= 0, record_every < 1 or cfl_guard outside (0, 0.5).
  void validate() const;
  bool operator==(const SolverConfig&) const = default;
};

/// Recorded states of one path. A state with event_index j >= 0 is the
/// post-jump state of noise event j; the state before it (same time) is the
/// pre-jump state.
struct Trajectory {
  std::vector<double> times;
  std::vector<Field> states;
  std::vector<int> event_index;
  NoisePath noise;
  double epsilon = 0.0;
};

/// Right-hand side between jumps: -(u u_x + P_x) - eps (sum_i w_i z_i) sigma u_x.
Field drift(const Field& u, double eps, const Field& sigma, const IntensityMeasure& measure, double k,
            bool dealias = true);

using RhsFn = std::function<Field(double t, const Field& u)>;
using JumpFn = std::function<Field(double t, const Field& u, double z)>;
using GuardFn = std::function<void(double t, const Field& u)>;

/// RK4 on the nominal grid n*dt with steps shortened to land on every event
/// and on T. Records every `record_every` nominal steps, at T, and both sides
/// of each jump. Non-finite states raise SolverAbort.
Trajectory integrate_events(const Field& u0, const NoisePath& path, double eps, const SolverConfig& config,
                            const RhsFn& rhs, const JumpFn& jump, const GuardFn& guard = {});

/// Full stochastic CH path: drift() between events, u -> marcus_map(u, -eps z, sigma) at events.
Trajectory evolve(const Field& u0, const NoisePath& path, double eps, const Field& sigma, double k,
                  const SolverConfig& config);

/// max_t |H1(u(t)) - H1(u0) - sum of jump increments
///        - (eps/2) sum_i w_i z_i int (sigma_x, u^2 - u_x^2) ds| / H1(u0),
/// with the time integral done by the trapezoid rule on recorded states.
double h1_evolution_residual(const Trajectory& traj, const Field& sigma);

/// Writes times.csv, fields.csv (every `stride`-th node) and manifest.json into `dir`.
void write_trajectory_bundle(const Trajectory& traj, const std::string& dir, const std::string& kind,
                             const std::string& metadata_json = "{}", int stride = 1);

}  // namespace chlab
