#include "chlab/modulation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "chlab/operators.hpp"

namespace chlab {

namespace {

// Pairings x -> (u(. + x), w1), (u(. + x), w2) and their x-derivatives,
// evaluated from the Fourier coefficients without transforming back.
class ShiftedPairing {
 public:
  ShiftedPairing(const Field& u, const Eigen::ArrayXcd& w1_hat, const Eigen::ArrayXcd& w2_hat)
      : k_(u.grid().wavenumbers()), scale_(u.grid().dx() / u.grid().size()) {
    const Eigen::ArrayXcd uh = u.grid().forward(u.values());
    p1_ = uh * w1_hat.conjugate();
    p2_ = uh * w2_hat.conjugate();
  }

  // value[0..1], slope[0..1]
  void eval(double x, double value[2], double slope[2]) const {
    const Eigen::Index ny = p1_.size() - 1;
    double v1 = p1_[0].real(), v2 = p2_[0].real();
    double s1 = 0.0, s2 = 0.0;
    for (Eigen::Index j = 1; j < ny; ++j) {
      const std::complex<double> e = std::polar(1.0, k_[j] * x);
      const std::complex<double> a = p1_[j] * e;
      const std::complex<double> b = p2_[j] * e;
      v1 += 2.0 * a.real();
      v2 += 2.0 * b.real();
      s1 -= 2.0 * k_[j] * a.imag();
      s2 -= 2.0 * k_[j] * b.imag();
    }
    const double kn = k_[ny];
    v1 += p1_[ny].real() * std::cos(kn * x);
    v2 += p2_[ny].real() * std::cos(kn * x);
    s1 -= kn * std::sin(kn * x) * p1_[ny].real();
    s2 -= kn * std::sin(kn * x) * p2_[ny].real();
    value[0] = scale_ * v1;
    value[1] = scale_ * v2;
    slope[0] = scale_ * s1;
    slope[1] = scale_ * s2;
  }

 private:
  const Eigen::ArrayXd& k_;
  double scale_;
  Eigen::ArrayXcd p1_;
  Eigen::ArrayXcd p2_;
};

constexpr double kNewtonTol = 1e-12;
constexpr int kMaxNewton = 50;

}  // namespace

Modulator::Modulator(GridPtr grid, double c0, double k)
    : grid_(std::move(grid)),
      c0_(c0),
      k_(k),
      cache_(grid_, k),
      ref_(cache_.get(SolitonParams(c0, k).c)),
      w1_(helmholtz(ref_->dphi_dx)),
      w2_(helmholtz(ref_->phi)) {
  if (profile_at(ref_->params, 0.5 * grid_->length()) > kDefaultTailTolerance) {
    throw DomainTooSmall("domain too small for the reference soliton at c0=" + std::to_string(c0));
  }
  w1_hat_ = grid_->forward(w1_.values());
  w2_hat_ = grid_->forward(w2_.values());
  A0_ << inner(ref_->dphi_dx, w1_), -inner(ref_->dphi_dc, w1_), inner(ref_->dphi_dx, w2_), -inner(ref_->dphi_dc, w2_);
}

ModulationState Modulator::extract(const Field& u, double eps, double c_guess, double x_guess,
                                   const SolitonProfile* jacobian_profile) const {
  require_same_grid(u, w1_);
  const SolitonProfile& jp = jacobian_profile ? *jacobian_profile : *ref_;
  const double jc1 = -inner(jp.dphi_dc, w1_);
  const double jc2 = -inner(jp.dphi_dc, w2_);
  const ShiftedPairing pairing(u, w1_hat_, w2_hat_);
  const double c_floor = 2.0 * k_ + 0.1 * (c0_ - 2.0 * k_);

  double c = c_guess;
  double x = x_guess;
  int iterations = 0;
  std::optional<Field> eta;
  for (int it = 0;; ++it) {
    if (!(c > c_floor) || !std::isfinite(c) || !std::isfinite(x)) {
      std::ostringstream msg;
      msg << "modulation breakdown: speed left the admissible range (c=" << c << ")";
      throw ModulationBreakdown(msg.str());
    }
    const Field phi = cache_.phi(c);
    double yu[2], dyu[2];
    pairing.eval(x, yu, dyu);
    const double f1 = yu[0] - inner(phi, w1_);
    const double f2 = yu[1] - inner(phi, w2_);
    const double size = std::max(std::abs(f1), std::abs(f2));
    if (size <= kNewtonTol) {
      iterations = it;
      const Field rem = shift(u, -x) - phi;
      eta = eps > 0.0 ? rem / eps : rem;
      break;
    }
    if (it >= kMaxNewton) {
      std::ostringstream msg;
      msg << "modulation breakdown: Newton did not converge in " << kMaxNewton << " iterations (|Y|=" << size << ")";
      throw ModulationBreakdown(msg.str());
    }
    Eigen::Matrix2d J;
    J << dyu[0], jc1, dyu[1], jc2;
    const Eigen::Vector2d step = J.partialPivLu().solve(Eigen::Vector2d(f1, f2));
    x -= step[0];
    c -= step[1];
  }
  ModulationState st{c, x, *eta, {inner(*eta, w1_), inner(*eta, w2_)}, iterations};
  return st;
}

ModulationSystem Modulator::assemble_system(const ModulationState& s, double eps, const Field& sigma_frame) const {
  const auto prof = cache_.get(s.c);
  const Field ex = deriv(s.eta, 1);
  const Field tangent = prof->dphi_dx + eps * ex;
  ModulationSystem sys;
  sys.A << inner(tangent, w1_), -inner(prof->dphi_dc, w1_), inner(tangent, w2_), -inner(prof->dphi_dc, w2_);

  const Field st = sigma_frame * tangent;
  sys.D << -inner(st, w1_), -inner(st, w2_);

  const LinearizedOperator op = LinearizedOperator::from_profile(*prof);
  const Field lin = -0.5 * deriv(apply_Lc(op, s.eta), 1);
  sys.E << inner(lin, ref_->dphi_dx), inner(lin, ref_->phi);
  if (eps != 0.0) {
    const Field f = f_of_eta(s.eta);
    sys.E[0] -= eps * inner(f, w1_);
    sys.E[1] -= eps * inner(f, w2_);
  }
  return sys;
}

ModulationCoefficients solve_coeffs(const ModulationSystem& sys, double tol_sing) {
  ModulationCoefficients out;
  out.A = sys.A;
  out.detA = sys.A.determinant();
  if (!(std::abs(out.detA) > tol_sing)) {
    std::ostringstream msg;
    msg << "modulation breakdown: |det A| = " << std::abs(out.detA) << " <= " << tol_sing;
    throw ModulationBreakdown(msg.str());
  }
  const Eigen::Matrix2d inv = sys.A.inverse();
  const Eigen::Vector2d mb = inv * sys.D;
  const Eigen::Vector2d ya = inv * sys.E;
  out.mu = mb[0];
  out.b = mb[1];
  out.y = ya[0];
  out.a = ya[1];
  return out;
}

Field sigma_in_frame(const Field& sigma, double x) {
  if (is_constant(sigma)) return sigma;
  return shift(sigma, -x);
}

ModulationTrack track(const Trajectory& traj, const Modulator& mod, double alpha, const Field& sigma,
                      bool with_coefficients) {
  ModulationTrack tr;
  tr.alpha = alpha;
  tr.epsilon = traj.epsilon;
  const double eps = traj.epsilon;
  double c_prev = mod.c0();
  double x_prev = 0.0;
  double t_prev = 0.0;
  // Held here rather than looked up in the shared cache, so the Newton
  // iterates do not depend on what other threads have evicted.
  std::shared_ptr<const SolitonProfile> jacobian;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const double t = traj.times[i];
    const double x_guess = traj.event_index[i] >= 0 ? x_prev : x_prev + c_prev * (t - t_prev);
    std::optional<ModulationState> found;
    try {
      found = mod.extract(traj.states[i], eps, c_prev, x_guess, jacobian.get());
    } catch (const ModulationBreakdown& e) {
      tr.exit_time = t;
      tr.exit_reason = e.what();
      break;
    }
    const ModulationState& st = *found;
    const double rem = (eps > 0.0 ? eps : 1.0) * h1_norm(st.eta);
    bool out = false;
    if (rem > alpha) {
      out = true;
      tr.exit_reason = "remainder left the tube";
    } else if (std::abs(st.c - mod.c0()) > alpha) {
      out = true;
      tr.exit_reason = "speed left the tube";
    }
    ModulationCoefficients co;
    if (with_coefficients) {
      try {
        co = solve_coeffs(mod.assemble_system(st, eps, sigma_in_frame(sigma, st.x)), mod.tol_sing());
      } catch (const ModulationBreakdown& e) {
        tr.exit_time = t;
        tr.exit_reason = e.what();
        break;
      }
      tr.coeffs.push_back(co);
      jacobian = mod.cache().get(st.c);
    }
    tr.times.push_back(t);
    tr.states.push_back(st);
    tr.event_index.push_back(traj.event_index[i]);
    tr.exited.push_back(out);
    if (out) {
      tr.exit_time = t;
      break;
    }
    c_prev = st.c;
    x_prev = st.x;
    t_prev = t;
  }
  return tr;
}

std::pair<double, double> parameter_residual(const ModulationTrack& tr, const NoisePath& path, double eps) {
  if (tr.coeffs.size() != tr.states.size()) throw std::invalid_argument("parameter_residual needs coefficients");
  const double m1 = path.measure.first_moment();
  double px = 0.0, pc = 0.0, rx = 0.0, rc = 0.0;
  for (std::size_t i = 1; i < tr.states.size(); ++i) {
    const auto& a = tr.coeffs[i - 1];
    const auto& b = tr.coeffs[i];
    if (tr.event_index[i] >= 0) {
      const double z = path.events.at(tr.event_index[i]).z;
      px += eps * z * 0.5 * (a.mu + b.mu);
      pc += eps * z * 0.5 * (a.b + b.b);
    } else {
      const double h = tr.times[i] - tr.times[i - 1];
      auto vx = [&](const ModulationCoefficients& co, const ModulationState& s) {
        return s.c + eps * co.y - eps * co.mu * m1;
      };
      auto vc = [&](const ModulationCoefficients& co) { return eps * co.a - eps * co.b * m1; };
      px += 0.5 * h * (vx(a, tr.states[i - 1]) + vx(b, tr.states[i]));
      pc += 0.5 * h * (vc(a) + vc(b));
    }
    rx = std::max(rx, std::abs(tr.states[i].x - tr.states[0].x - px));
    rc = std::max(rc, std::abs(tr.states[i].c - tr.states[0].c - pc));
  }
  return {rx, rc};
}

void write_track_csv(const ModulationTrack& tr, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file);
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "t,c_eps,x_eps,h1_norm_eta,y_eps,a_eps,b_eps,mu_eps,detA,exited\n";
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const auto& s = tr.states[i];
    out << num(tr.times[i]) << ',' << num(s.c) << ',' << num(s.x) << ',' << num(h1_norm(s.eta));
    if (i < tr.coeffs.size()) {
      const auto& c = tr.coeffs[i];
      out << ',' << num(c.y) << ',' << num(c.a) << ',' << num(c.b) << ',' << num(c.mu) << ',' << num(c.detA);
    } else {
      out << ",,,,,";
    }
    out << ',' << (tr.exited[i] ? 1 : 0) << '\n';
  }
}

}  // namespace chlab
