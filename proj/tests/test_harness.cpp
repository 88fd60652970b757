#include <doctest.h>

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chlab/harness.hpp"

using namespace chlab;
namespace fs = std::filesystem;

namespace {

RunConfig small_config() {
  RunConfig c;
  c.N = 256;
  c.T = 0.5;
  c.n_paths = 4;
  c.epsilons = {0.08, 0.04};
  c.base_seed = 17;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("chlab_harness_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config round trip") {
  const RunConfig d;
  CHECK(parse_config(print_config(d)) == d);
  RunConfig c = small_config();
  c.atoms = {{0.1, 0.3}, {-1.0, 2.5}, {0.7, 1.0 / 3.0}};
  c.sigma = "constant:1.25";
  c.solver.dt = 7e-4;
  c.solver.dealias = false;
  c.epsilons = {0.1, 1.0 / 30.0};
  c.alpha = 0.0123456789;
  c.out_dir = "some/where";
  CHECK(parse_config(print_config(c)) == c);
  CHECK(print_config(parse_config(print_config(c))) == print_config(c));

  const RunConfig p = parse_config("# comment\n  grid.N = 512  \n\nexperiment.epsilons = 0.1, 0.05 # trailing\n");
  CHECK(p.N == 512);
  CHECK(p.epsilons == std::vector<double>{0.1, 0.05});
  CHECK(p.L == d.L);
}

TEST_CASE("config errors") {
  for (const char* bad : {"grid.M = 3", "grid.N = 7", "grid.N = abc", "grid.L", "soliton.c0 = 1.5",
                          "noise.atoms = 0.5", "noise.atoms = 2:1", "noise.sigma = gauss:1", "solver.dt = -1",
                          "solver.dealias = maybe", "experiment.epsilons = 0.02, 0.04",
                          "experiment.epsilons = 0.1, -0.1", "experiment.n_paths = 0", "experiment.alpha = 0",
                          "experiment.base_seed = -4", "solver.cfl_guard = 0.6", "experiment.T = nan"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/chlab.cfg"), ConfigError);
}

TEST_CASE("config hash") {
  const RunConfig a = small_config();
  RunConfig b = a;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.base_seed += 1;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("parallel_for") {
  std::vector<int> out(100, -1);
  parallel_for(100, 4, [&](int i) { out[i] = i * i; });
  for (int i = 0; i < 100; ++i) CHECK(out[i] == i * i);
  std::atomic<int> count{0};
  CHECK_THROWS_AS(parallel_for(20, 3,
                               [&](int i) {
                                 ++count;
                                 if (i == 5) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
  parallel_for(0, 2, [&](int) { FAIL("no work expected"); });
}

TEST_CASE("exit probability run") {
  const RunConfig c = small_config();
  const ExperimentReport r1 = run_exit_prob(c, {1, ""});
  REQUIRE(r1.exit_rows.size() == 2);
  for (const auto& row : r1.exit_rows) {
    CHECK(row.exit_frac >= 0.0);
    CHECK(row.exit_frac <= 1.0);
    CHECK(row.n_paths + row.n_failed == c.n_paths);
    CHECK(row.stderr_ == doctest::Approx(std::sqrt(row.exit_frac * (1 - row.exit_frac) / row.n_paths)));
    const auto g = PeriodicGrid::create(c.L, c.N);
    CHECK(row.b_eps == b_of_eps(row.epsilon, make_sigma(g, c.sigma), c.measure()));
  }
  CHECK(!r1.ensemble_failed());

  const ExperimentReport r3 = run_exit_prob(c, {3, ""});
  CHECK(report_json(r1) == report_json(r3));
  CHECK(report_csv(r1) == report_csv(r3));

  const std::string csv = report_csv(r1);
  CHECK(csv.rfind("epsilon,b_eps,exit_frac,stderr,n_paths\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

  const auto j = nlohmann::json::parse(report_json(r1));
  CHECK(j["kind"] == "exit-prob");
  CHECK(j["config_hash"] == config_hash(c));
  CHECK(j["version"] == kVersion);
  CHECK(parse_config(j["config"].get<std::string>()) == c);
  CHECK(j["rows"].size() == 2);

  SUBCASE("emit and keep paths") {
    const fs::path out = scratch("emit"), keep = scratch("keep");
    const ExperimentReport r = run_exit_prob(c, {2, keep.string()});
    emit(r, out.string());
    CHECK(slurp(out / "report.csv") == report_csv(r1));
    CHECK(slurp(out / "report.json") == report_json(r1));
    CHECK(fs::exists(out / "timing.json"));
    int n = 0;
    for (const auto& e : fs::directory_iterator(keep)) n += e.path().extension() == ".csv";
    CHECK(n == c.n_paths * 2);

    // Writing below a regular file fails with the path in the message.
    const fs::path blocked = out / "report.csv" / "sub";
    try {
      emit(r, blocked.string());
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find(blocked.string()) != std::string::npos);
    }
    fs::remove_all(out);
    fs::remove_all(keep);
  }
}

TEST_CASE("failing paths are counted") {
  RunConfig c = small_config();
  c.solver.dt = 0.05;  // trips the CFL guard on the N=256 grid
  const ExperimentReport r = run_exit_prob(c, {2, ""});
  for (const auto& row : r.exit_rows) {
    CHECK(row.n_failed == c.n_paths);
    CHECK(row.n_paths == 0);
  }
  CHECK(r.failures.size() == 2u * c.n_paths);
  CHECK(r.ensemble_failed());
}

TEST_CASE("convergence run") {
  RunConfig c = small_config();
  c.n_paths = 3;
  const ExperimentReport r1 = run_convergence(c, {1, ""});
  const ExperimentReport r2 = run_convergence(c, {2, ""});
  CHECK(report_json(r1) == report_json(r2));
  CHECK(report_csv(r1) == report_csv(r2));
  REQUIRE(r1.convergence_rows.size() == 2);
  CHECK(report_csv(r1).rfind("epsilon,mean_sup_l2,d_mu,d_b,d_y,d_a\n", 0) == 0);
  for (const auto& row : r1.convergence_rows) {
    CHECK(row.n_paths == 3);
    CHECK(row.mean_sup_l2 >= 0.0);
  }
  CHECK(r1.convergence_rows[1].mean_sup_l2 < r1.convergence_rows[0].mean_sup_l2);
}
