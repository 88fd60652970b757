#include "chlab/harness.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include "chlab/linearized.hpp"
#include "chlab/modulation.hpp"

namespace chlab {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string path_tag(double eps, std::uint64_t seed) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "eps_%g_seed_%llu", eps, static_cast<unsigned long long>(seed));
  return buf;
}

struct Setup {
  GridPtr grid;
  Field sigma;
  IntensityMeasure measure;
  Modulator mod;

  explicit Setup(const RunConfig& cfg)
      : grid(PeriodicGrid::create(cfg.L, cfg.N)),
        sigma(make_sigma(grid, cfg.sigma)),
        measure(cfg.measure()),
        mod(grid, cfg.c0, cfg.k) {}
};

}  // namespace

bool ExperimentReport::ensemble_failed() const {
  auto bad = [](int failed, int done) { return failed * 10 > failed + done; };
  for (const auto& r : exit_rows) {
    if (bad(r.n_failed, r.n_paths)) return true;
  }
  for (const auto& r : convergence_rows) {
    if (bad(r.n_failed, r.n_paths)) return true;
  }
  return false;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

ExperimentReport run_exit_prob(const RunConfig& cfg, const RunOptions& opt) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const Setup s(cfg);
  const Field& u0 = s.mod.reference().phi;
  const int M = cfg.n_paths;
  const int E = static_cast<int>(cfg.epsilons.size());
  if (!opt.keep_paths_dir.empty()) std::filesystem::create_directories(opt.keep_paths_dir);

  struct Outcome {
    bool ok = false;
    bool exited = false;
    std::string error;
  };
  std::vector<Outcome> out(static_cast<std::size_t>(M) * E);
  parallel_for(M * E, opt.workers, [&](int task) {
    const int e = task / M;
    const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(task % M);
    const double eps = cfg.epsilons[e];
    Outcome& o = out[task];
    try {
      const NoisePath path = sample_path(s.measure, cfg.T, seed);
      const Trajectory traj = evolve(u0, path, eps, s.sigma, cfg.k, cfg.solver);
      const ModulationTrack tr = track(traj, s.mod, cfg.alpha, s.sigma, false);
      o.exited = tr.exit_time.has_value();
      o.ok = true;
      if (!opt.keep_paths_dir.empty()) {
        write_track_csv(tr, (std::filesystem::path(opt.keep_paths_dir) / (path_tag(eps, seed) + ".csv")).string());
      }
    } catch (const Error& ex) {
      o.error = ex.what();
    }
  });

  ExperimentReport rep;
  rep.kind = "exit-prob";
  rep.config = cfg;
  for (int e = 0; e < E; ++e) {
    ExitProbRow row;
    row.epsilon = cfg.epsilons[e];
    row.b_eps = b_of_eps(row.epsilon, s.sigma, s.measure);
    int exits = 0;
    for (int i = 0; i < M; ++i) {
      const Outcome& o = out[static_cast<std::size_t>(e) * M + i];
      if (o.ok) {
        ++row.n_paths;
        exits += o.exited ? 1 : 0;
      } else {
        ++row.n_failed;
        rep.failures.push_back("eps=" + num(row.epsilon) + ", seed=" + std::to_string(cfg.base_seed + i) + ": " +
                               o.error);
      }
    }
    if (row.n_paths > 0) {
      row.exit_frac = static_cast<double>(exits) / row.n_paths;
      row.stderr_ = std::sqrt(row.exit_frac * (1.0 - row.exit_frac) / row.n_paths);
    }
    rep.exit_rows.push_back(row);
  }
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

ExperimentReport run_convergence(const RunConfig& cfg, const RunOptions& opt) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const Setup s(cfg);
  const Field& u0 = s.mod.reference().phi;
  const LimitCoefficients limit(s.mod, s.sigma);
  const int M = cfg.n_paths;
  const int E = static_cast<int>(cfg.epsilons.size());
  if (!opt.keep_paths_dir.empty()) std::filesystem::create_directories(opt.keep_paths_dir);

  struct Outcome {
    std::optional<CouplingStats> stats;
    std::string error;
  };
  // One task per seed so the limit path is shared by every epsilon.
  std::vector<Outcome> out(static_cast<std::size_t>(M) * E);
  parallel_for(M, opt.workers, [&](int i) {
    const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(i);
    const NoisePath path = sample_path(s.measure, cfg.T, seed);
    std::optional<Trajectory> eta;
    std::string eta_error;
    try {
      eta = evolve_eta(path, 1.0, limit, cfg.solver);
    } catch (const Error& ex) {
      eta_error = ex.what();
    }
    for (int e = 0; e < E; ++e) {
      Outcome& o = out[static_cast<std::size_t>(e) * M + i];
      if (!eta) {
        o.error = "limit equation: " + eta_error;
        continue;
      }
      const double eps = cfg.epsilons[e];
      try {
        const Trajectory traj = evolve(u0, path, eps, s.sigma, cfg.k, cfg.solver);
        const ModulationTrack tr = track(traj, s.mod, cfg.alpha, s.sigma, true);
        o.stats = coupled_discrepancy(tr, *eta, limit, cfg.T);
        if (!opt.keep_paths_dir.empty()) {
          write_track_csv(tr, (std::filesystem::path(opt.keep_paths_dir) / (path_tag(eps, seed) + ".csv")).string());
        }
      } catch (const Error& ex) {
        o.error = ex.what();
      }
    }
  });

  ExperimentReport rep;
  rep.kind = "convergence";
  rep.config = cfg;
  for (int e = 0; e < E; ++e) {
    ConvergenceRow row;
    row.epsilon = cfg.epsilons[e];
    for (int i = 0; i < M; ++i) {
      const Outcome& o = out[static_cast<std::size_t>(e) * M + i];
      if (o.stats) {
        ++row.n_paths;
        row.mean_sup_l2 += o.stats->sup_l2;
        row.d_mu += o.stats->d_mu;
        row.d_b += o.stats->d_b;
        row.d_y += o.stats->d_y;
        row.d_a += o.stats->d_a;
      } else {
        ++row.n_failed;
        rep.failures.push_back("eps=" + num(row.epsilon) + ", seed=" + std::to_string(cfg.base_seed + i) + ": " +
                               o.error);
      }
    }
    if (row.n_paths > 0) {
      const double n = row.n_paths;
      row.mean_sup_l2 /= n;
      row.d_mu /= n;
      row.d_b /= n;
      row.d_y /= n;
      row.d_a /= n;
    }
    rep.convergence_rows.push_back(row);
  }
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

std::string report_csv(const ExperimentReport& r) {
  std::ostringstream out;
  if (r.kind == "exit-prob") {
    out << "epsilon,b_eps,exit_frac,stderr,n_paths\n";
    for (const auto& row : r.exit_rows) {
      out << num(row.epsilon) << ',' << num(row.b_eps) << ',' << num(row.exit_frac) << ',' << num(row.stderr_) << ','
          << row.n_paths << '\n';
    }
  } else {
    out << "epsilon,mean_sup_l2,d_mu,d_b,d_y,d_a\n";
    for (const auto& row : r.convergence_rows) {
      out << num(row.epsilon) << ',' << num(row.mean_sup_l2) << ',' << num(row.d_mu) << ',' << num(row.d_b) << ','
          << num(row.d_y) << ',' << num(row.d_a) << '\n';
    }
  }
  return out.str();
}

std::string report_json(const ExperimentReport& r) {
  nlohmann::ordered_json j;
  j["kind"] = r.kind;
  j["version"] = kVersion;
  j["config_hash"] = config_hash(r.config);
  j["base_seed"] = r.config.base_seed;
  j["config"] = print_config(r.config);
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : r.exit_rows) {
    rows.push_back({{"epsilon", row.epsilon},
                    {"b_eps", row.b_eps},
                    {"exit_frac", row.exit_frac},
                    {"stderr", row.stderr_},
                    {"n_paths", row.n_paths},
                    {"n_failed", row.n_failed}});
  }
  for (const auto& row : r.convergence_rows) {
    rows.push_back({{"epsilon", row.epsilon},
                    {"mean_sup_l2", row.mean_sup_l2},
                    {"d_mu", row.d_mu},
                    {"d_b", row.d_b},
                    {"d_y", row.d_y},
                    {"d_a", row.d_a},
                    {"n_paths", row.n_paths},
                    {"n_failed", row.n_failed}});
  }
  j["rows"] = rows;
  j["failures"] = r.failures;
  return j.dump(2) + "\n";
}

void emit(const ExperimentReport& r, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir + ": " + ec.message());
  auto write = [&](const std::string& name, const std::string& text) {
    const fs::path p = fs::path(dir) / name;
    std::ofstream out(p);
    if (!out) throw Error("cannot write " + p.string());
    out << text;
    if (!out) throw Error("write failed for " + p.string());
  };
  write("report.json", report_json(r));
  write("report.csv", report_csv(r));
  nlohmann::ordered_json t;
  t["runtime_seconds"] = r.runtime_seconds;
  write("timing.json", t.dump(2) + "\n");
}

}  // namespace chlab
