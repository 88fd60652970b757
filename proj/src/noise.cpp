#include "chlab/noise.hpp"

#include <json.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace chlab {

IntensityMeasure::IntensityMeasure(std::vector<Atom> list) : atoms(std::move(list)) {
  for (const Atom& a : atoms) {
    if (!(a.z != 0.0 && std::abs(a.z) <= 1.0)) throw std::invalid_argument("jump marks must satisfy 0 < |z| <= 1");
    if (!(a.w > 0.0) || !std::isfinite(a.w)) throw std::invalid_argument("atom weights must be positive");
  }
}

double IntensityMeasure::total_rate() const {
  double s = 0.0;
  for (const Atom& a : atoms) s += a.w;
  return s;
}

double IntensityMeasure::first_moment() const {
  double s = 0.0;
  for (const Atom& a : atoms) s += a.w * a.z;
  return s;
}

double IntensityMeasure::second_moment() const {
  double s = 0.0;
  for (const Atom& a : atoms) s += a.w * a.z * a.z;
  return s;
}

NoisePath NoisePath::scaled(double factor) const {
  NoisePath out = *this;
  for (auto& e : out.events) e.z *= factor;
  for (auto& a : out.measure.atoms) a.z *= factor;
  return out;
}

NoisePath sample_path(const IntensityMeasure& measure, double T, std::uint64_t seed) {
  if (!(T > 0.0)) throw std::invalid_argument("noise horizon must be positive");
  NoisePath path{T, seed, measure, {}};
  const double rate = measure.total_rate();
  if (measure.atoms.empty()) return path;

  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gap(rate);
  std::vector<double> weights;
  for (const auto& a : measure.atoms) weights.push_back(a.w);
  std::discrete_distribution<int> pick(weights.begin(), weights.end());

  double t = 0.0;
  while (true) {
    t += gap(rng);
    if (t > T) break;
    const int i = pick(rng);
    if (!path.events.empty() && t <= path.events.back().t) continue;
    path.events.push_back({t, measure.atoms[i].z});
  }
  return path;
}

std::string to_json(const NoisePath& path) {
  nlohmann::json j;
  j["T"] = path.T;
  j["seed"] = path.seed;
  j["atoms"] = nlohmann::json::array();
  for (const auto& a : path.measure.atoms) j["atoms"].push_back({{"z", a.z}, {"w", a.w}});
  j["events"] = nlohmann::json::array();
  for (const auto& e : path.events) j["events"].push_back({{"t", e.t}, {"z", e.z}});
  return j.dump(2);
}

NoisePath noise_path_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  std::vector<IntensityMeasure::Atom> atoms;
  for (const auto& a : j.at("atoms")) atoms.push_back({a.at("z").get<double>(), a.at("w").get<double>()});
  NoisePath path{j.at("T").get<double>(), j.at("seed").get<std::uint64_t>(), IntensityMeasure(std::move(atoms)), {}};
  for (const auto& e : j.at("events")) path.events.push_back({e.at("t").get<double>(), e.at("z").get<double>()});
  return path;
}

Field make_sigma(const GridPtr& grid, const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ConfigError("sigma must be 'constant:v' or 'sine:mean,amp', got '" + spec + "'");
  const std::string kind = spec.substr(0, colon);
  std::string rest = spec.substr(colon + 1);
  for (char& ch : rest) {
    if (ch == ',') ch = ' ';
  }
  std::istringstream in(rest);
  if (kind == "constant") {
    double v;
    if (!(in >> v) || !(in >> std::ws).eof()) throw ConfigError("bad constant sigma '" + spec + "'");
    return Field::constant(grid, v);
  }
  if (kind == "sine") {
    double mean, amp;
    if (!(in >> mean >> amp) || !(in >> std::ws).eof()) throw ConfigError("bad sine sigma '" + spec + "'");
    const double kk = 2.0 * std::numbers::pi / grid->length();
    return Field::from_function(grid, [=](double x) { return mean + amp * std::sin(kk * x); });
  }
  throw ConfigError("unknown sigma kind '" + kind + "'");
}

bool is_constant(const Field& sigma) {
  const Eigen::ArrayXd& v = sigma.values();
  return (v == v[0]).all();
}

Field marcus_map(const Field& u, double amplitude, const Field& sigma) {
  require_same_grid(u, sigma);
  if (amplitude == 0.0) return u;
  const double reach = std::abs(amplitude) * sigma.max_abs();
  if (reach > 0.25 * u.grid().length()) {
    std::ostringstream msg;
    msg << "jump too large for domain: |a| max|sigma| = " << reach << " > L/4";
    throw JumpTooLarge(msg.str());
  }
  if (is_constant(sigma)) return shift(u, amplitude * sigma[0]);

  const TrigInterpolant s(sigma);
  const TrigInterpolant uu(u);
  const int substeps = 8;
  const double h = 1.0 / substeps;
  auto vel = [&](double x) { return -amplitude * s(x); };  // backward in flow time
  Eigen::ArrayXd out(u.size());
  for (int i = 0; i < u.grid().size(); ++i) {
    double x = u.grid().node(i);
    for (int m = 0; m < substeps; ++m) {
      const double k1 = vel(x);
      const double k2 = vel(x + 0.5 * h * k1);
      const double k3 = vel(x + 0.5 * h * k2);
      const double k4 = vel(x + h * k3);
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    out[i] = uu(x);
  }
  return u.with_values(std::move(out));
}

Field compensator_drift(const Field& u, double eps, const Field& sigma, const IntensityMeasure& measure) {
  Field acc = Field::zeros(u.grid_ptr());
  if (eps == 0.0) return acc;
  const Field su = sigma * deriv(u, 1);
  for (const auto& a : measure.atoms) {
    const double amp = eps * a.z;
    acc = acc + a.w * (marcus_map(u, amp, sigma) - u + amp * su);
  }
  return acc;
}

double b_of_eps(double eps, const Field& sigma, const IntensityMeasure& measure) {
  const double s = deriv(sigma, 1).max_abs();
  double b = 0.0;
  for (const auto& a : measure.atoms) {
    const double r = eps * std::abs(a.z) * s;
    b += a.w * (std::pow(std::expm1(r), 2) + std::pow(std::expm1(1.5 * r), 2));
  }
  return b;
}

}  // namespace chlab
