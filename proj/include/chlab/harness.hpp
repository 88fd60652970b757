#pragma once

#include <functional>
#include <string>
#include <vector>

#include "chlab/config.hpp"

namespace chlab {

inline constexpr const char* kVersion = "0.1.0";

struct ExitProbRow {
  double epsilon = 0.0;
  double b_eps = 0.0;
  double exit_frac = 0.0;
  double stderr_ = 0.0;
  int n_paths = 0;   // completed paths
  int n_failed = 0;  // solver aborts and other per-path errors
};

struct ConvergenceRow {
  double epsilon = 0.0;
  double mean_sup_l2 = 0.0;
  double d_mu = 0.0;
  double d_b = 0.0;
  double d_y = 0.0;
  double d_a = 0.0;
  int n_paths = 0;
  int n_failed = 0;
};

struct ExperimentReport {
  std::string kind;  // "exit-prob" or "convergence"
  RunConfig config;
  std::vector<ExitProbRow> exit_rows;
  std::vector<ConvergenceRow> convergence_rows;
  std::vector<std::string> failures;  // "eps=..., seed=...: message", sorted by eps then seed
  double runtime_seconds = 0.0;       // written to timing.json only

  /// More than 10% of attempted paths failed at some epsilon.
  bool ensemble_failed() const;
};

struct RunOptions {
  int workers = 1;
  /// When non-empty, per-path track CSVs go to <keep_paths_dir>/.
  std::string keep_paths_dir;
};

/// Runs fn(0..n-1) on a fixed pool; each result lands at its own index.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

/// Exit fraction per epsilon over seeds base_seed .. base_seed + M - 1.
ExperimentReport run_exit_prob(const RunConfig& cfg, const RunOptions& opt = {});

/// Coupled full and limit paths per seed; per epsilon the seed-mean of the
/// sup discrepancies.
ExperimentReport run_convergence(const RunConfig& cfg, const RunOptions& opt = {});

std::string report_csv(const ExperimentReport& r);
std::string report_json(const ExperimentReport& r);

/// Writes report.json, report.csv and timing.json into dir.
void emit(const ExperimentReport& r, const std::string& dir);

}  // namespace chlab
