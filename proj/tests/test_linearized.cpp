#include <doctest.h>

#include <cmath>

#include "chlab/linearized.hpp"
#include "support.hpp"

using namespace chlab;

namespace {

const IntensityMeasure kSym({{0.5, 1.0}, {-0.5, 1.0}});

struct Setup {
  GridPtr g = PeriodicGrid::create(80.0, 512);
  Modulator mod{g, 3.0, 1.0};
  Field sig = make_sigma(g, "sine:1,0.3");
  LimitCoefficients limit{mod, sig};
};

const Setup& setup() {
  static const Setup s;
  return s;
}

/// Removes the phi' and phi components so both orthogonality conditions hold.
Field orthogonal(const Modulator& mod, const Field& eta) {
  const Field& p = mod.reference().phi;
  const Field& px = mod.reference().dphi_dx;
  return eta - inner(eta, mod.w1()) / inner(px, mod.w1()) * px - inner(eta, mod.w2()) / inner(p, mod.w2()) * p;
}

}  // namespace

TEST_CASE("limit coefficients for constant sigma") {
  const auto& S = setup();
  for (double s : {1.0, 0.7}) {
    const LimitCoefficients lc = limit_coeffs(S.mod, Field::constant(S.g, s));
    CHECK(lc.time_constant());
    for (double t : {0.0, 0.6, 1.9}) {
      CHECK(std::abs(lc.mu(t) + s) < 1e-12);
      CHECK(std::abs(lc.b(t)) < 1e-12);
      CHECK(lc.jump_coefficient(t).max_abs() < 1e-12);
    }
  }
  CHECK(!S.limit.time_constant());
}

TEST_CASE("linear functionals") {
  const auto& S = setup();
  const Field zero = Field::zeros(S.g);
  CHECK(S.limit.y(zero) == 0.0);
  CHECK(S.limit.a(zero) == 0.0);
  const Field eta = testsupport::random_smooth(S.g, 3);
  CHECK(std::abs(S.limit.y(2.5 * eta) - 2.5 * S.limit.y(eta)) < 1e-12 * (1 + std::abs(S.limit.y(eta))));
  CHECK(std::abs(S.limit.a(2.5 * eta) - 2.5 * S.limit.a(eta)) < 1e-12 * (1 + std::abs(S.limit.a(eta))));

  const Field& px = S.mod.reference().dphi_dx;
  CHECK(l2_norm(S.limit.linear_drift(px)) / l2_norm(px) < 1e-5);
}

TEST_CASE("limit of the modulation system") {
  const auto& S = setup();
  for (int seed = 0; seed < 3; ++seed) {
    const Field eta = orthogonal(S.mod, testsupport::random_smooth(S.g, 40 + seed));
    for (double t : {0.0, 0.8}) {
      const double x = 3.0 * t;
      const ModulationState st{3.0, x, eta, {inner(eta, S.mod.w1()), inner(eta, S.mod.w2())}, 0};
      const auto co =
          solve_coeffs(S.mod.assemble_system(st, 0.0, sigma_in_frame(S.sig, x)), S.mod.tol_sing());
      CHECK(std::abs(co.y - S.limit.y(eta)) < 1e-8);
      CHECK(std::abs(co.a - S.limit.a(eta)) < 1e-8);
      CHECK(std::abs(co.mu - S.limit.mu(t)) < 1e-8);
      CHECK(std::abs(co.b - S.limit.b(t)) < 1e-8);
    }
  }
}

TEST_CASE("limit equation") {
  const auto& S = setup();
  SolverConfig cfg;
  const NoisePath empty{2.0, 0, kSym, {}};
  const Trajectory none = evolve_eta(empty, 1.0, S.limit, cfg);
  for (const Field& e : none.states) CHECK(e.max_abs() == 0.0);
  CHECK(orthogonality_drift(none, S.mod) == 0.0);

  const NoisePath path = sample_path(kSym, 2.0, 9);
  REQUIRE(!path.events.empty());
  const Trajectory one = evolve_eta(path, 1.0, S.limit, cfg);
  const Trajectory two = evolve_eta(path.scaled(2.0), 1.0, S.limit, cfg);
  const Trajectory two_b = evolve_eta(path, 2.0, S.limit, cfg);
  REQUIRE(one.states.size() == two.states.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < one.states.size(); ++i) {
    worst = std::max(worst, (two.states[i] - 2.0 * one.states[i]).max_abs());
    CHECK((two.states[i].values() == two_b.states[i].values()).all());
  }
  CHECK(worst < 1e-8);
  CHECK(one.states.back().max_abs() > 1e-3);

  const LimitCoefficients flat = limit_coeffs(S.mod, Field::constant(S.g, 1.0));
  for (const Field& e : evolve_eta(path, 1.0, flat, cfg).states) CHECK(e.max_abs() < 1e-10);

  SUBCASE("orthogonality is kept") {
    const IntensityMeasure asym({{1.0, 2.0}, {-0.3, 0.5}});
    const NoisePath ap = sample_path(asym, 2.0, 12);
    for (double dt : {2e-3, 1e-3}) {
      SolverConfig c;
      c.dt = dt;
      CHECK(orthogonality_drift(evolve_eta(path, 1.0, S.limit, c), S.mod) < 1e-12);
      CHECK(orthogonality_drift(evolve_eta(ap, 1.0, S.limit, c), S.mod) < 1e-12);
    }
  }
}

TEST_CASE("coupled comparison") {
  const auto& S = setup();
  const NoisePath empty{2.0, 0, kSym, {}};
  const Field& phi = S.mod.reference().phi;
  {
    const ModulationTrack tk = track(evolve(phi, empty, 0.0, S.sig, 1.0, SolverConfig{}), S.mod, 0.05, S.sig);
    const Trajectory eta = evolve_eta(empty, 1.0, S.limit, SolverConfig{});
    CHECK(compare_remainder(tk, eta, 2.0) < 1e-9);
  }

  const NoisePath path = sample_path(kSym, 2.0, 21);
  const Trajectory eta = evolve_eta(path, 1.0, S.limit, SolverConfig{});
  std::vector<CouplingStats> stats;
  for (double eps : {0.08, 0.04, 0.02}) {
    const ModulationTrack tk = track(evolve(phi, path, eps, S.sig, 1.0, SolverConfig{}), S.mod, 0.05, S.sig);
    REQUIRE(!tk.exit_time);
    stats.push_back(coupled_discrepancy(tk, eta, S.limit, 2.0));
    CHECK(compare_remainder(tk, eta, 2.0) == stats.back().sup_l2);
  }
  for (std::size_t i = 1; i < stats.size(); ++i) {
    CHECK(stats[i].sup_l2 / stats[i - 1].sup_l2 <= 0.8);
    CHECK(stats[i].d_mu < stats[i - 1].d_mu);
    CHECK(stats[i].d_b < stats[i - 1].d_b);
    CHECK(stats[i].d_y < stats[i - 1].d_y);
    CHECK(stats[i].d_a < stats[i - 1].d_a);
  }

  SUBCASE("constant sigma is degenerate") {
    const Field flat = Field::constant(S.g, 1.0);
    const LimitCoefficients lc = limit_coeffs(S.mod, flat);
    const Trajectory zero = evolve_eta(path, 1.0, lc, SolverConfig{});
    for (double eps : {0.08, 0.02}) {
      const ModulationTrack tk = track(evolve(phi, path, eps, flat, 1.0, SolverConfig{}), S.mod, 0.05, flat);
      const CouplingStats s = coupled_discrepancy(tk, zero, lc, 2.0);
      CHECK(s.d_mu < 1e-6);
      CHECK(s.d_b < 1e-6);
      CHECK(s.d_y < 1e-6);
      CHECK(s.d_a < 1e-6);
    }
  }
  SUBCASE("mismatched time grids are rejected") {
    SolverConfig coarse;
    coarse.record_every = 7;
    const ModulationTrack tk = track(evolve(phi, path, 0.04, S.sig, 1.0, coarse), S.mod, 0.05, S.sig);
    CHECK_THROWS_AS(compare_remainder(tk, eta, 2.0), std::invalid_argument);
  }
}
