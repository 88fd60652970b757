#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chlab/noise.hpp"
#include "chlab/solver.hpp"

namespace chlab {

/// Everything a run depends on. Text form is flat `key = value` lines with
/// dotted section names, e.g. `grid.L = 80`.
struct RunConfig {
  double L = 80.0;
  int N = 2048;
  double c0 = 3.0;
  double k = 1.0;
  std::vector<IntensityMeasure::Atom> atoms{{0.5, 1.0}, {-0.5, 1.0}};
  std::string sigma = "sine:1,0.3";
  SolverConfig solver{};
  std::vector<double> epsilons{0.08, 0.04, 0.02};
  double alpha = 0.05;
  double T = 2.0;
  int n_paths = 200;
  std::uint64_t base_seed = 1;
  std::string out_dir = "out";

  /// Throws ConfigError with the offending key.
  void validate() const;
  IntensityMeasure measure() const { return IntensityMeasure(atoms); }

  bool operator==(const RunConfig&) const = default;
};

/// Canonical text form; numbers use round-trip precision.
std::string print_config(const RunConfig& cfg);
/// Starts from the defaults and applies every line. Unknown keys and bad
/// values raise ConfigError. The result is validated.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& file);
/// 64-bit FNV-1a of print_config, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace chlab
