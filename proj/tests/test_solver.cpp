#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "chlab/operators.hpp"
#include "chlab/solver.hpp"
#include "support.hpp"

using namespace chlab;

namespace {

const IntensityMeasure kSym({{0.5, 1.0}, {-0.5, 1.0}});
const IntensityMeasure kAsym({{1.0, 2.0}, {-0.3, 0.5}});

NoisePath empty_path(double T) { return NoisePath{T, 0, kSym, {}}; }

double soliton_error(const Trajectory& tr, const Field& phi, double c) {
  return (tr.states.back() - shift(phi, c * tr.times.back())).max_abs();
}

int count_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  int n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST_CASE("solver config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.dt = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SolverConfig{};
  c.record_every = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SolverConfig{};
  c.cfl_guard = 0.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("drift") {
  auto g = PeriodicGrid::create(80.0, 1024);
  const SolitonProfile prof = build_profile(SolitonParams(3.0, 1.0), g);
  const Field one = Field::constant(g, 1.0);
  const Field sig = make_sigma(g, "sine:1,0.3");
  CHECK((drift(prof.phi, 0.0, sig, kSym, 1.0) + 3.0 * prof.dphi_dx).max_abs() < 1e-6);
  CHECK(drift(Field::zeros(g), 0.0, sig, kSym, 1.0).max_abs() == 0.0);

  const Field u = prof.phi + 0.1 * testsupport::random_smooth(g, 1);
  const double a = 2.7;
  const Field lhs = drift(shift(u, a), 0.1, Field::constant(g, 1.4), kAsym, 1.0);
  const Field rhs = shift(drift(u, 0.1, Field::constant(g, 1.4), kAsym, 1.0), a);
  CHECK((lhs - rhs).max_abs() < 1e-9);

  SUBCASE("compensated driver identity") {
    // Between jumps the compensated driver contributes -eps m1 sigma u_x, which
    // is the compensator minus the mean jump rate times the mean jump.
    for (const Field& s : {one, sig}) {
      const double eps = 0.05;
      Field mean_jump = Field::zeros(g);
      for (const auto& at : kAsym.atoms) mean_jump = mean_jump + at.w * (marcus_map(u, -eps * at.z, s) - u);
      const Field expect = ch_drift(u, 1.0) + compensator_drift(u, -eps, s, kAsym) - mean_jump;
      CHECK((drift(u, eps, s, kAsym, 1.0) - expect).max_abs() < 1e-12);
    }
  }
}

TEST_CASE("deterministic soliton propagation") {
  auto g = PeriodicGrid::create(80.0, 1024);
  const SolitonProfile prof = build_profile(SolitonParams(3.0, 1.0), g);
  const Field one = Field::constant(g, 1.0);
  SolverConfig cfg;
  const Trajectory tr = evolve(prof.phi, empty_path(1.0), 0.0, one, 1.0, cfg);
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.times.back() == 1.0);
  CHECK(tr.times.size() == 101);
  CHECK(soliton_error(tr, prof.phi, 3.0) < 1e-4);
  const double h1 = hamiltonian_h1(prof.phi), h2 = hamiltonian_h2(prof.phi, 1.0);
  CHECK(std::abs(hamiltonian_h1(tr.states.back()) - h1) / h1 < 1e-8);
  CHECK(std::abs(hamiltonian_h2(tr.states.back(), 1.0) - h2) / h2 < 1e-6);
  CHECK(h1_evolution_residual(tr, one) < 1e-8);

  const Trajectory again = evolve(prof.phi, empty_path(1.0), 0.0, one, 1.0, cfg);
  CHECK((again.states.back().values() == tr.states.back().values()).all());
}

TEST_CASE("time step convergence") {
  auto g = PeriodicGrid::create(80.0, 512);
  const Field phi = sample_profile(SolitonParams(3.0, 1.0), g);
  const Field one = Field::constant(g, 1.0);
  std::vector<double> err;
  for (double dt : {0.02, 0.01, 0.005}) {
    SolverConfig cfg;
    cfg.dt = dt;
    cfg.record_every = 1000;
    err.push_back(soliton_error(evolve(phi, empty_path(1.0), 0.0, one, 1.0, cfg), phi, 3.0));
  }
  CHECK(err[0] / err[1] >= 8.0);
  CHECK(err[1] / err[2] >= 8.0);
}

TEST_CASE("jumps and the H1 identity") {
  auto g = PeriodicGrid::create(80.0, 1024);
  const Field phi = sample_profile(SolitonParams(3.0, 1.0), g);
  const Field one = Field::constant(g, 1.0);
  const Field sig = make_sigma(g, "sine:1,0.3");
  SolverConfig cfg;
  const NoisePath path = sample_path(kSym, 2.0, 5);
  REQUIRE(path.events.size() >= 2);

  SUBCASE("recording around events") {
    const Trajectory tr = evolve(phi, path, 0.1, sig, 1.0, cfg);
    int posts = 0;
    for (std::size_t i = 1; i < tr.times.size(); ++i) {
      CHECK(tr.times[i] >= tr.times[i - 1]);
      if (tr.event_index[i] >= 0) {
        ++posts;
        CHECK(tr.times[i] == path.events[tr.event_index[i]].t);
        CHECK(tr.times[i - 1] == tr.times[i]);
        CHECK(tr.event_index[i - 1] < 0);
      }
    }
    CHECK(posts == static_cast<int>(path.events.size()));
    CHECK(tr.times.back() == 2.0);
  }
  SUBCASE("constant sigma jumps are H1 neutral") {
    const Trajectory tr = evolve(phi, path, 0.2, one, 1.0, cfg);
    for (std::size_t i = 1; i < tr.times.size(); ++i) {
      if (tr.event_index[i] < 0) continue;
      const double before = hamiltonian_h1(tr.states[i - 1]);
      CHECK(std::abs(hamiltonian_h1(tr.states[i]) / before - 1) < 1e-10);
      const Field expect = shift(tr.states[i - 1], -0.2 * path.events[tr.event_index[i]].z);
      CHECK((tr.states[i] - expect).max_abs() < 1e-12);
    }
    CHECK(h1_evolution_residual(tr, one) < 1e-8);
  }
  SUBCASE("variable sigma") {
    const Trajectory tr = evolve(phi, path, 0.05, sig, 1.0, cfg);
    CHECK(h1_evolution_residual(tr, sig) < 1e-4);
  }
  SUBCASE("asymmetric measure needs the drift term") {
    const NoisePath ap = sample_path(kAsym, 1.0, 8);
    SolverConfig fine;
    fine.record_every = 1;
    Trajectory tr = evolve(phi, ap, 0.05, sig, 1.0, fine);
    const double with_term = h1_evolution_residual(tr, sig);
    CHECK(with_term < 1e-9);
    tr.noise.measure = kSym;  // first moment 0: the integral term drops out
    CHECK(h1_evolution_residual(tr, sig) > 1e3 * with_term);
  }
}

TEST_CASE("aborts") {
  auto g = PeriodicGrid::create(80.0, 1024);
  const Field phi = sample_profile(SolitonParams(3.0, 1.0), g);
  const Field one = Field::constant(g, 1.0);
  SolverConfig cfg;
  cfg.dt = 0.04;
  CHECK_THROWS_AS(evolve(phi, empty_path(1.0), 0.0, one, 1.0, cfg), SolverAbort);

  auto nan_rhs = [](double t, const Field& u) {
    if (t < 0.5) return Field::zeros(u.grid_ptr());
    return Field::constant(u.grid_ptr(), std::numeric_limits<double>::quiet_NaN());
  };
  auto no_jump = [](double, const Field& u, double) { return u; };
  CHECK_THROWS_AS(integrate_events(phi, empty_path(1.0), 0.0, SolverConfig{}, nan_rhs, no_jump), SolverAbort);
  cfg = SolverConfig{};
  CHECK_THROWS_AS(marcus_map(phi, 30.0, one), JumpTooLarge);
}

TEST_CASE("default experiment stays near the soliton") {
  auto g = PeriodicGrid::create(80.0, 1024);
  const Field phi = sample_profile(SolitonParams(3.0, 1.0), g);
  const Field sig = make_sigma(g, "sine:1,0.3");
  for (std::uint64_t seed : {1u, 2u}) {
    const Trajectory tr = evolve(phi, sample_path(kSym, 2.0, seed), 0.08, sig, 1.0, SolverConfig{});
    double lo = 1.0;
    for (const Field& u : tr.states) lo = std::min(lo, u.values().minCoeff());
    CHECK(lo > -0.05);
    const Trajectory again = evolve(phi, sample_path(kSym, 2.0, seed), 0.08, sig, 1.0, SolverConfig{});
    CHECK((again.states.back().values() == tr.states.back().values()).all());
  }
}

TEST_CASE("trajectory bundle") {
  auto g = PeriodicGrid::create(80.0, 256);
  const Field phi = sample_profile(SolitonParams(3.0, 1.0), g);
  const NoisePath path = sample_path(kSym, 0.5, 3);
  SolverConfig cfg;
  cfg.dt = 0.005;
  const Trajectory tr = evolve(phi, path, 0.05, make_sigma(g, "sine:1,0.3"), 1.0, cfg);
  const auto dir = std::filesystem::temp_directory_path() / "chlab_bundle_test";
  std::filesystem::remove_all(dir);
  write_trajectory_bundle(tr, dir.string(), "full", R"({"note": "unit"})", 4);
  CHECK(count_lines(dir / "times.csv") == static_cast<int>(tr.times.size()) + 1);
  CHECK(count_lines(dir / "fields.csv") == static_cast<int>(tr.times.size()) + 1);
  std::ifstream fin(dir / "fields.csv");
  std::string header;
  std::getline(fin, header);
  CHECK(std::count(header.begin(), header.end(), ',') == 64);
  std::ifstream min(dir / "manifest.json");
  const auto m = nlohmann::json::parse(min);
  CHECK(m["kind"] == "full");
  CHECK(m["seed"] == 3);
  CHECK(m["metadata"]["note"] == "unit");
  CHECK(m["n_events"] == path.events.size());
  CHECK_THROWS_AS(write_trajectory_bundle(tr, dir.string(), "full", "{}", 0), std::invalid_argument);
  std::filesystem::remove_all(dir);
}
