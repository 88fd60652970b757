#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "chlab/config.hpp"
#include "chlab/harness.hpp"
#include "chlab/linearized.hpp"
#include "chlab/modulation.hpp"
#include "chlab/operators.hpp"

using namespace chlab;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config_file;
  long long seed = -1;
  std::string out;
  bool keep_paths = false;
  int workers = 1;
  double eps = -1.0;
};

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config_file.empty() ? RunConfig{} : load_config(c.config_file);
  if (c.seed >= 0) cfg.base_seed = static_cast<std::uint64_t>(c.seed);
  if (!c.out.empty()) cfg.out_dir = c.out;
  cfg.validate();
  return cfg;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int soliton_check(const RunConfig& cfg) {
  const auto grid = PeriodicGrid::create(cfg.L, cfg.N);
  const SolitonParams p(cfg.c0, cfg.k);
  const SolitonProfile prof = build_profile(p, grid);
  const double peak = prof.phi.max_abs();
  const double res = ode_residual(prof);

  // Least-squares slope of log(phi) over 10 <= x <= 30.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int i = 0; i < grid->size(); ++i) {
    const double x = grid->node(i);
    if (x < 10.0 || x > 30.0 || prof.phi[i] <= 0.0) continue;
    const double y = std::log(prof.phi[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y, ++n;
  }
  const double slope = n > 1 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;

  std::printf("peak            %.15g (c - 2k = %.15g)\n", peak, p.peak());
  std::printf("ode residual    %.3e\n", res);
  std::printf("decay fit       %.6f (expected %.6f)\n", -slope, p.decay_rate());
  std::printf("tail phi(L/2)   %.3e\n", profile_at(p, 0.5 * cfg.L));

  fs::create_directories(cfg.out_dir);
  const fs::path file = fs::path(cfg.out_dir) / "profile.csv";
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  out << "x,phi,dphi_dx,dphi_dc\n";
  for (int i = 0; i < grid->size(); ++i) {
    out << num(grid->node(i)) << ',' << num(prof.phi[i]) << ',' << num(prof.dphi_dx[i]) << ','
        << num(prof.dphi_dc[i]) << '\n';
  }
  std::printf("wrote %s\n", file.string().c_str());
  return 0;
}

nlohmann::json run_metadata(const RunConfig& cfg, double eps) {
  return {{"config_hash", config_hash(cfg)}, {"config", print_config(cfg)}, {"epsilon", eps}, {"version", kVersion}};
}

int simulate(const RunConfig& cfg, double eps, bool modulate) {
  const auto grid = PeriodicGrid::create(cfg.L, cfg.N);
  const Field sigma = make_sigma(grid, cfg.sigma);
  const Modulator mod(grid, cfg.c0, cfg.k);
  const NoisePath path = sample_path(cfg.measure(), cfg.T, cfg.base_seed);
  const Trajectory traj = evolve(mod.reference().phi, path, eps, sigma, cfg.k, cfg.solver);

  fs::create_directories(cfg.out_dir);
  {
    std::ofstream out(fs::path(cfg.out_dir) / "noise.json");
    out << to_json(path) << '\n';
  }
  const std::string meta = run_metadata(cfg, eps).dump();
  std::printf("events          %zu\n", path.events.size());
  std::printf("recorded states %zu\n", traj.states.size());
  std::printf("H1 residual     %.3e\n", h1_evolution_residual(traj, sigma));
  if (!modulate) {
    write_trajectory_bundle(traj, (fs::path(cfg.out_dir) / "full").string(), "full", meta);
    std::printf("wrote %s/full\n", cfg.out_dir.c_str());
    return 0;
  }
  const ModulationTrack tr = track(traj, mod, cfg.alpha, sigma, true);
  write_track_csv(tr, (fs::path(cfg.out_dir) / "track.csv").string());
  const LimitCoefficients limit(mod, sigma);
  const Trajectory eta = evolve_eta(path, 1.0, limit, cfg.solver);
  write_trajectory_bundle(eta, (fs::path(cfg.out_dir) / "limit").string(), "limit", meta);
  const auto [rx, rc] = parameter_residual(tr, path, eps);
  std::printf("tracked rows    %zu\n", tr.states.size());
  if (tr.exit_time) {
    std::printf("exit            t=%.6g (%s)\n", *tr.exit_time, tr.exit_reason.c_str());
  } else {
    std::printf("exit            none\n");
  }
  std::printf("param residual  x %.3e  c %.3e\n", rx, rc);
  std::printf("sup |eta_eps - eta|  %.6e\n", compare_remainder(tr, eta, cfg.T));
  std::printf("wrote %s/track.csv and %s/limit\n", cfg.out_dir.c_str(), cfg.out_dir.c_str());
  return 0;
}

int experiment(const RunConfig& cfg, const Common& c, bool exit_prob) {
  RunOptions opt;
  opt.workers = c.workers;
  if (c.keep_paths) opt.keep_paths_dir = (fs::path(cfg.out_dir) / "paths").string();
  const ExperimentReport rep = exit_prob ? run_exit_prob(cfg, opt) : run_convergence(cfg, opt);
  emit(rep, cfg.out_dir);
  std::cout << report_csv(rep);
  for (const auto& f : rep.failures) std::cerr << "path failure: " << f << '\n';
  std::printf("wrote %s/report.{json,csv}\n", cfg.out_dir.c_str());
  if (rep.ensemble_failed()) {
    std::cerr << "more than 10% of paths failed\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic Camassa-Holm soliton lab"};
  app.require_subcommand(1);
  Common c;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", c.config_file, "key = value config file");
    sub->add_option("--seed", c.seed, "base seed (overrides experiment.base_seed)");
    sub->add_option("--out", c.out, "output directory (overrides output.dir)");
    sub->add_flag("--keep-paths", c.keep_paths, "write per-path track CSVs");
    sub->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
  };
  auto* sol = app.add_subcommand("soliton-check", "build the reference soliton and write profile.csv");
  auto* sim = app.add_subcommand("simulate", "evolve one path and write the trajectory bundle");
  auto* mod = app.add_subcommand("modulate", "evolve, track and solve the limit equation for one path");
  auto* ex = app.add_subcommand("exit-prob", "exit-probability ensemble");
  auto* conv = app.add_subcommand("convergence", "coupled convergence study");
  for (auto* s : {sol, sim, mod, ex, conv}) add_common(s);
  for (auto* s : {sim, mod}) s->add_option("--eps", c.eps, "noise amplitude (default: first experiment epsilon)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const RunConfig cfg = resolve(c);
    const double eps = c.eps >= 0.0 ? c.eps : cfg.epsilons.front();
    if (*sol) return soliton_check(cfg);
    if (*sim) return simulate(cfg, eps, false);
    if (*mod) return simulate(cfg, eps, true);
    if (*ex) return experiment(cfg, c, true);
    if (*conv) return experiment(cfg, c, false);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
