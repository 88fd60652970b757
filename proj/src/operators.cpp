#include "chlab/operators.hpp"

namespace chlab {

double hamiltonian_h1(const Field& u) {
  const Field ux = deriv(u, 1);
  return 0.5 * (inner(u, u) + inner(ux, ux));
}

double hamiltonian_h2(const Field& u, double k) {
  const Eigen::ArrayXd& v = u.values();
  const Eigen::ArrayXd ux = deriv(u, 1).values();
  return 0.5 * u.grid().dx() * (v.cube() + v * ux.square() + 2.0 * k * v.square()).sum();
}

Field h1_grad(const Field& u) { return helmholtz(u); }

Field h2_grad(const Field& u, double k) {
  const Field ux = deriv(u, 1);
  const Field uxx = deriv(u, 2);
  return 1.5 * dealiased_product(u, u) - 0.5 * dealiased_product(ux, ux) - dealiased_product(u, uxx) + 2.0 * k * u;
}

Field pressure(const Field& u, double k) {
  const Field ux = deriv(u, 1);
  return helmholtz_inv(dealiased_product(u, u) + 0.5 * dealiased_product(ux, ux) + 2.0 * k * u);
}

Field ch_drift(const Field& u, double k, bool dealias) {
  const PeriodicGrid& g = u.grid();
  const Eigen::ArrayXd& kw = g.wavenumbers();
  const std::complex<double> I(0.0, 1.0);
  const Eigen::ArrayXcd uh = g.forward(u.values());
  const int cut = dealias ? g.dealias_cutoff() : g.n_modes() - 1;

  Eigen::ArrayXcd low = uh;
  low.tail(low.size() - cut - 1).setZero();
  Eigen::ArrayXcd low_x = I * kw * low;
  const Eigen::ArrayXd uf = g.inverse(low);
  const Eigen::ArrayXd uxf = g.inverse(low_x);

  Eigen::ArrayXcd adv = g.forward(uf * uxf);
  Eigen::ArrayXcd src = g.forward(uf.square() + 0.5 * uxf.square());
  adv.tail(adv.size() - cut - 1).setZero();
  src.tail(src.size() - cut - 1).setZero();
  src += 2.0 * k * uh;
  Eigen::ArrayXcd out = -(adv + I * kw / (1.0 + kw.square()) * src);
  out[out.size() - 1] = 0.0;
  return Field(u.grid_ptr(), g.inverse(std::move(out)));
}

LinearizedOperator LinearizedOperator::from_profile(const SolitonProfile& profile) {
  return {profile.params.c, profile.params.k, profile.phi, deriv(profile.phi, 2)};
}

Field apply_Lc(const LinearizedOperator& op, const Field& w) {
  const Field wx = deriv(w, 1);
  const Field coef = 2.0 * op.c - 2.0 * op.phi;
  return -deriv(dealiased_product(coef, wx), 1) - 6.0 * dealiased_product(op.phi, w) +
         2.0 * dealiased_product(op.phi_xx, w) + 2.0 * (op.c - 2.0 * op.k) * w;
}

Field f_of_eta(const Field& eta) {
  const Field ex = deriv(eta, 1);
  return -dealiased_product(eta, ex) -
         helmholtz_inv(deriv(dealiased_product(eta, eta) + 0.5 * dealiased_product(ex, ex), 1));
}

Field g_of_eta(const Field& eta, double c_eps, const SolitonProfile& profile_ceps, const SolitonProfile& profile_c0) {
  const double dc = c_eps - profile_c0.params.c;
  const Field dphi = profile_ceps.phi - profile_c0.phi;
  const Field dphi_xx = deriv(dphi, 2);
  const Field ex = deriv(eta, 1);
  return -2.0 * deriv(dealiased_product(dc - dphi, ex), 2) - 6.0 * deriv(dealiased_product(dphi, eta), 1) +
         2.0 * deriv(dealiased_product(dphi_xx, eta), 1) + 2.0 * dc * ex;
}

}  // namespace chlab
