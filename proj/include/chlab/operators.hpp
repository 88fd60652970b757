#pragma once

#include "chlab/grid.hpp"
#include "chlab/soliton.hpp"

namespace chlab {

/// H1(u) = 1/2 int u^2 + u_x^2.
double hamiltonian_h1(const Field& u);
/// H2(u) = 1/2 int u^3 + u u_x^2 + 2k u^2.
double hamiltonian_h2(const Field& u, double k);

/// L2 gradient of H1: u - u_xx.
Field h1_grad(const Field& u);
/// L2 gradient of H2: 3/2 u^2 - 1/2 u_x^2 - u u_xx + 2k u.
Field h2_grad(const Field& u, double k);

/// P = (1 - d^2)^{-1} (u^2 + 1/2 u_x^2 + 2k u).
Field pressure(const Field& u, double k);

/// Deterministic CH right-hand side -(u u_x + P_x), with dealiased products.
Field ch_drift(const Field& u, double k, bool dealias = true);

/// w -> -d/dx((2c - 2 phi) w_x) - 6 phi w + 2 phi'' w + 2(c - 2k) w.
struct LinearizedOperator {
  double c;
  double k;
  Field phi;
  Field phi_xx;

  static LinearizedOperator from_profile(const SolitonProfile& profile);
};

Field apply_Lc(const LinearizedOperator& op, const Field& w);

/// f(eta) = -eta eta_x - (1 - d^2)^{-1} d/dx(eta^2 + 1/2 eta_x^2).
Field f_of_eta(const Field& eta);

/// d/dx L_{c_eps} eta - d/dx L_{c0} eta, written out term by term.
Field g_of_eta(const Field& eta, double c_eps, const SolitonProfile& profile_ceps, const SolitonProfile& profile_c0);

}  // namespace chlab
