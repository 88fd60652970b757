#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chlab/grid.hpp"

namespace chlab {

/// Finite discrete jump measure: sum_i w_i delta_{z_i} on {|z| <= 1}.
struct IntensityMeasure {
  struct Atom {
    double z;
    double w;
    bool operator==(const Atom&) const = default;
  };
  std::vector<Atom> atoms;

  IntensityMeasure() = default;
  /// Throws std::invalid_argument unless 0 < |z| <= 1 and w > 0 for every atom.
  explicit IntensityMeasure(std::vector<Atom> list);

  double total_rate() const;
  /// sum_i w_i z_i
  double first_moment() const;
  /// sum_i w_i z_i^2
  double second_moment() const;
};

struct JumpEvent {
  double t;
  double z;
};

/// One realization of the compound Poisson driver on (0, T].
struct NoisePath {
  double T = 0.0;
  std::uint64_t seed = 0;
  IntensityMeasure measure;
  std::vector<JumpEvent> events;

  /// The same path with every mark multiplied by `factor`.
  NoisePath scaled(double factor) const;
};

NoisePath sample_path(const IntensityMeasure& measure, double T, std::uint64_t seed);

std::string to_json(const NoisePath& path);
NoisePath noise_path_from_json(const std::string& text);

/// Noise intensity from a spec string: "constant:v" or "sine:mean,amp"
/// (mean + amp sin(2 pi x / L)). Throws ConfigError on bad input.
Field make_sigma(const GridPtr& grid, const std::string& spec);

/// True when all samples are equal.
bool is_constant(const Field& sigma);

/// Time-1 flow of dy/dt = -a sigma(x) y_x applied to u. Constant sigma gives
/// shift(u, a sigma); otherwise characteristics are traced back with RK4 and u
/// is evaluated by trigonometric interpolation. Throws JumpTooLarge when
/// |a| max|sigma| > L/4.
Field marcus_map(const Field& u, double amplitude, const Field& sigma);

/// sum_i w_i [marcus_map(u, eps z_i, sigma) - u + eps z_i sigma u_x].
Field compensator_drift(const Field& u, double eps, const Field& sigma, const IntensityMeasure& measure);

/// sum_i w_i [(exp(eps |z_i| s) - 1)^2 + (exp(1.5 eps |z_i| s) - 1)^2], s = max|sigma_x|.
double b_of_eps(double eps, const Field& sigma, const IntensityMeasure& measure);

}  // namespace chlab
