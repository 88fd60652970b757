#include "chlab/solver.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chlab/operators.hpp"

namespace chlab {

void SolverConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("solver.dt must be positive");
  if (record_every < 1) throw ConfigError("solver.record_every must be at least 1");
  if (!(cfl_guard > 0.0 && cfl_guard < 0.5)) throw ConfigError("solver.cfl_guard must lie in (0, 0.5)");
}

Field drift(const Field& u, double eps, const Field& sigma, const IntensityMeasure& measure, double k, bool dealias) {
  Field f = ch_drift(u, k, dealias);
  const double m1 = eps * measure.first_moment();
  if (m1 == 0.0) return f;
  return f - m1 * (sigma * deriv(u, 1));
}

namespace {

Field rk4_step(const RhsFn& rhs, double t, const Field& u, double h) {
  const Field k1 = rhs(t, u);
  const Field k2 = rhs(t + 0.5 * h, u + (0.5 * h) * k1);
  const Field k3 = rhs(t + 0.5 * h, u + (0.5 * h) * k2);
  const Field k4 = rhs(t + h, u + h * k3);
  return u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Trajectory integrate_events(const Field& u0, const NoisePath& path, double eps, const SolverConfig& config,
                            const RhsFn& rhs, const JumpFn& jump, const GuardFn& guard) {
  config.validate();
  const double T = path.T;
  const double dt = config.dt;
  const long n_steps = std::max(1L, static_cast<long>(std::ceil(T / dt - 1e-9)));
  auto nominal = [&](long n) { return n >= n_steps ? T : n * dt; };

  Trajectory traj;
  traj.noise = path;
  traj.epsilon = eps;
  auto record = [&](double t, const Field& u, int ev) {
    if (ev < 0 && !traj.times.empty() && traj.times.back() == t) return;
    traj.times.push_back(t);
    traj.states.push_back(u);
    traj.event_index.push_back(ev);
  };

  Field u = u0;
  double t = 0.0;
  long n = 0;
  std::size_t j = 0;
  record(0.0, u, -1);
  try {
    while (t < T) {
      const double t_nom = nominal(n + 1);
      double target = t_nom;
      const bool at_event = j < path.events.size() && path.events[j].t <= t_nom;
      if (at_event) target = path.events[j].t;
      const double h = target - t;
      if (h > 0.0) {
        if (guard) guard(t, u);
        u = rk4_step(rhs, t, u, h);
      }
      t = target;
      if (target == t_nom) {
        ++n;
        if (n % config.record_every == 0 || n >= n_steps) record(t, u, -1);
      }
      if (at_event) {
        record(t, u, -1);
        u = jump(t, u, path.events[j].z);
        record(t, u, static_cast<int>(j));
        ++j;
      }
    }
  } catch (const NonFiniteField& e) {
    std::ostringstream msg;
    msg << "non-finite state near t=" << t << ": " << e.what();
    throw SolverAbort(msg.str());
  }
  return traj;
}

Trajectory evolve(const Field& u0, const NoisePath& path, double eps, const Field& sigma, double k,
                  const SolverConfig& config) {
  require_same_grid(u0, sigma);
  const IntensityMeasure& measure = path.measure;
  auto rhs = [&](double, const Field& u) { return drift(u, eps, sigma, measure, k, config.dealias); };
  auto jump = [&](double, const Field& u, double z) { return marcus_map(u, -eps * z, sigma); };
  const double dx = u0.grid().dx();
  auto guard = [&](double t, const Field& u) {
    const double cfl = (u.max_abs() + 2.0 * k) * config.dt / dx;
    if (cfl > config.cfl_guard) {
      std::ostringstream msg;
      msg << "CFL guard tripped at t=" << t << ": " << cfl << " > " << config.cfl_guard;
      throw SolverAbort(msg.str());
    }
  };
  return integrate_events(u0, path, eps, config, rhs, jump, guard);
}

double h1_evolution_residual(const Trajectory& traj, const Field& sigma) {
  if (traj.states.empty()) return 0.0;
  const double coef = 0.5 * traj.epsilon * traj.noise.measure.first_moment();
  const Field sx = deriv(sigma, 1);
  auto rate = [&](const Field& u) {
    if (coef == 0.0) return 0.0;
    const Field ux = deriv(u, 1);
    return coef * inner(sx, u * u - ux * ux);
  };
  const double h0 = hamiltonian_h1(traj.states[0]);
  double jumps = 0.0;
  double integral = 0.0;
  double worst = 0.0;
  double prev_h = h0;
  double prev_rate = rate(traj.states[0]);
  for (std::size_t i = 1; i < traj.states.size(); ++i) {
    const double h = hamiltonian_h1(traj.states[i]);
    const double r = rate(traj.states[i]);
    if (traj.event_index[i] >= 0) {
      jumps += h - prev_h;
    } else {
      integral += 0.5 * (traj.times[i] - traj.times[i - 1]) * (r + prev_rate);
    }
    worst = std::max(worst, std::abs(h - h0 - jumps - integral));
    prev_h = h;
    prev_rate = r;
  }
  return worst / h0;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

}  // namespace

void write_trajectory_bundle(const Trajectory& traj, const std::string& dir, const std::string& kind,
                             const std::string& metadata_json, int stride) {
  if (stride < 1) throw std::invalid_argument("stride must be at least 1");
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    auto out = open_out(fs::path(dir) / "times.csv");
    out << "index,t,event\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      out << i << ',' << fmt(traj.times[i]) << ',' << traj.event_index[i] << '\n';
    }
  }
  {
    auto out = open_out(fs::path(dir) / "fields.csv");
    if (!traj.states.empty()) {
      const PeriodicGrid& g = traj.states[0].grid();
      out << "t";
      for (int i = 0; i < g.size(); i += stride) out << ",x=" << fmt(g.node(i));
      out << '\n';
      for (std::size_t r = 0; r < traj.states.size(); ++r) {
        out << fmt(traj.times[r]);
        for (int i = 0; i < g.size(); i += stride) out << ',' << fmt(traj.states[r][i]);
        out << '\n';
      }
    }
  }
  nlohmann::json m;
  m["kind"] = kind;
  m["epsilon"] = traj.epsilon;
  m["seed"] = traj.noise.seed;
  m["T"] = traj.noise.T;
  m["n_times"] = traj.times.size();
  m["n_events"] = traj.noise.events.size();
  m["stride"] = stride;
  if (!traj.states.empty()) {
    m["L"] = traj.states[0].grid().length();
    m["N"] = traj.states[0].grid().size();
  }
  m["metadata"] = nlohmann::json::parse(metadata_json);
  auto out = open_out(fs::path(dir) / "manifest.json");
  out << m.dump(2) << '\n';
}

}  // namespace chlab
