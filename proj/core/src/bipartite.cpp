#include "fpcav/bipartite.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fpcav/errors.hpp"
#include "fpcav/forces.hpp"

namespace fpcav {

void BipartiteConfig::validate() const {
  for (int J = 0; J < 2; ++J) {
    modes[J].oscillator.validate();
    if (modes[J].oscillator.mirror != J + 1)
      throw ConfigError("bipartite mode " + std::to_string(J + 1) + " must sit on mirror " +
                        std::to_string(J + 1));
    if (modes[J].profile.rows() == 0) throw ConfigError("bipartite mode without a surface profile");
  }
  const auto& a = modes[0].oscillator;
  const auto& b = modes[1].oscillator;
  const double spread = std::abs(a.omega0 - b.omega0);
  const double limit = max_detuning * std::max(a.gamma, b.gamma);
  if (spread > limit) {
    std::ostringstream os;
    os << "bipartite modes " << a.omega0 << " and " << b.omega0 << " rad/s differ by more than "
       << max_detuning << " linewidths; use the full Langevin system";
    throw ConfigError(os.str());
  }
}

namespace {

// Generator per unit amplitude, in round-trip phase units.
ModeMatrix unit_profile(const Cavity& cav, const BipartiteConfig& cfg, int J) {
  return cfg.modes[J].profile / (2.0 * cav.geometry().k);
}

cplx delay(const Cavity& cav, int J, int Jp, cplx omega) {
  const double tau = cav.geometry().tau;
  return std::exp(I * omega * (J == Jp ? tau : tau / 2.0));
}

SourceInfo shot_source(const Cavity& cav, const BipartiteConfig& cfg, int J) {
  SourceInfo s;
  s.kind = SourceKind::shot_force;
  s.name = "shot:" + cfg.modes[J].label;
  s.mirror = J + 1;
  s.oscillator = J;
  s.mirror_mode = true;
  s.generator = unit_profile(cav, cfg, J);
  return s;
}

SourceInfo thermal_source(const BipartiteConfig& cfg, int J) {
  SourceInfo s;
  s.kind = SourceKind::thermal;
  s.name = "thermal:" + cfg.modes[J].label;
  s.mirror = J + 1;
  s.oscillator = J;
  s.mirror_mode = true;
  return s;
}

// Symmetrized covariance and commutator of (thermal1, thermal2, shot1, shot2) at ϖ.
struct SourceStats {
  Eigen::Matrix4cd sym = Eigen::Matrix4cd::Zero();
  Eigen::Matrix4cd comm = Eigen::Matrix4cd::Zero();
};

SourceStats source_stats(const Cavity& cav, const ModeVector& v1, const BipartiteConfig& cfg,
                         const BipartiteNoise& noise, const std::vector<SourceInfo>& sources,
                         double omega) {
  SourceStats st;
  for (int J = 0; J < 2; ++J) {
    const auto tc = thermal_correlations(cfg.modes[J].oscillator, noise.thermal, omega);
    if (noise.thermal_on) st.sym(J, J) = tc.XX_sym;
    st.comm(J, J) = tc.commutator;
  }
  const auto sc = shot_correlations(cav, v1, {sources[2], sources[3]}, omega);
  if (noise.shot_on) st.sym.block<2, 2>(2, 2) = sc.symmetrized;
  st.comm.block<2, 2>(2, 2) = sc.commutator;
  return st;
}

// Σ_ab a_a b_b M_ab for row vectors a = eᵀT(ϖ), b = fᵀT(−ϖ).
cplx pair(const Eigen::RowVector4cd& a, const Eigen::RowVector4cd& b, const Eigen::Matrix4cd& M) {
  return (a * M * b.transpose())(0, 0);
}

}  // namespace

PonderomotiveFactors pond_factors(const Cavity& cav, const ModeVector& v1, const BipartiteConfig& cfg,
                                  cplx omega, MechQuadrature quad) {
  cfg.validate();
  const double k = cav.geometry().k;
  const double E2 = cav.geometry().calE * cav.geometry().calE;
  std::vector<MirrorProfile> prof;
  for (int J = 0; J < 2; ++J) prof.push_back({cfg.modes[J].label, J + 1, unit_profile(cav, cfg, J)});
  const Eigen::MatrixXcd F = deformation_forces(cav, v1, prof, omega);

  PonderomotiveFactors pf;
  pf.omega = omega;
  for (int J = 0; J < 2; ++J) {
    pf.chi[J] = susceptibility(cfg.modes[J].oscillator, k, omega, quad);
    const double pre = radiation_prefactor(cav.config(), J + 1, true);
    for (int Jp = 0; Jp < 2; ++Jp)
      pf.P(J, Jp) = (J == Jp ? 1.0 : 0.0) -
                    cfg.radiation_sign * pre * pf.chi[J] * E2 * F(J, Jp) * delay(cav, J + 1, Jp + 1, omega);
  }
  pf.D = pf.P.determinant();
  for (int J = 0; J < 2; ++J) {
    pf.P_plus[J] = pf.P(J, J) + pf.P(J, 1 - J);
    pf.P_minus[J] = pf.P(J, J) - pf.P(J, 1 - J);
  }
  const double norm =
      std::pow(std::abs(pf.P_plus[0] * pf.P_plus[1] * pf.P_minus[0] * pf.P_minus[1]), -0.5);
  pf.alpha = {pf.P(1, 1) * norm, pf.P(0, 1) * norm};
  return pf;
}

BipartiteResponse solve_bipartite(const Cavity& cav, const ModeVector& v1, const BipartiteConfig& cfg,
                                  cplx omega, MechQuadrature quad, double response_scale) {
  BipartiteResponse r;
  r.omega = omega;
  r.factors = pond_factors(cav, v1, cfg, omega, quad);
  const auto& P = r.factors.P;
  const cplx D = r.factors.D;
  if (std::abs(D) < 1e-14 * P.cwiseAbs().maxCoeff() * P.cwiseAbs().maxCoeff())
    throw SingularityError("bipartite determinant vanishes", std::abs(D));
  Eigen::Matrix2cd inv;
  inv << P(1, 1), -P(0, 1), -P(1, 0), P(0, 0);
  inv /= D;

  const double k = cav.geometry().k;
  const double E = cav.geometry().calE;
  r.sources = {thermal_source(cfg, 0), thermal_source(cfg, 1), shot_source(cav, cfg, 0), shot_source(cav, cfg, 1)};
  Eigen::Matrix<cplx, 2, 4> rhs = Eigen::Matrix<cplx, 2, 4>::Zero();
  for (int J = 0; J < 2; ++J) {
    const auto& osc = cfg.modes[J].oscillator;
    const cplx chi = response_scale * r.factors.chi[J];
    rhs(J, J) = thermal_weight(osc, k) * chi;
    rhs(J, 2 + J) = cfg.radiation_sign * radiation_prefactor(cav.config(), J + 1, true) * chi * E;
  }
  r.T = inv * rhs;
  return r;
}

EntanglementResult entanglement(const Cavity& cav, const ModeVector& v1, const BipartiteConfig& cfg,
                                const BipartiteNoise& noise, double omega) {
  if (!(omega > 0.0)) throw ConfigError("entanglement needs a positive frequency");
  const auto rp = solve_bipartite(cav, v1, cfg, omega, MechQuadrature::X, noise.response_scale);
  const auto rm = solve_bipartite(cav, v1, cfg, -omega, MechQuadrature::X, noise.response_scale);
  const SourceStats st = source_stats(cav, v1, cfg, noise, rp.sources, omega);

  // symmetrized variance of u = e(ϖ)·ζ(ϖ), with e(−ϖ) = ē for hermitian combinations
  auto variance = [&](const Eigen::Vector2cd& e) {
    const Eigen::RowVector4cd a = e.transpose() * rp.T;
    const Eigen::RowVector4cd b = e.conjugate().transpose() * rm.T;
    return pair(a, b, st.sym).real();
  };
  const double w01 = cfg.modes[0].oscillator.omega0;
  const double w02 = cfg.modes[1].oscillator.omega0;
  const cplx y1 = I * omega / w01;
  const cplx y2 = I * omega / w02;

  EntanglementResult res;
  res.omega = omega;
  res.var_sum = variance({1.0, 1.0});
  res.var_diff = variance({1.0, -1.0});
  res.var1 = variance({1.0, 0.0});
  res.var2 = variance({0.0, 1.0});
  res.var_diff_y = variance({y1, -y2});
  const Eigen::RowVector4cd a = Eigen::Vector2cd(1.0, 0.0).transpose() * rp.T;
  const Eigen::RowVector4cd b = Eigen::Vector2cd(std::conj(y1), 0.0).transpose() * rm.T;
  res.commutator = pair(a, b, st.comm);
  const double c2 = std::norm(res.commutator);
  if (!(c2 > 0.0)) throw SingularityError("vanishing commutator in the entanglement measure", c2);
  res.E = res.var_sum * res.var_diff_y / c2;
  return res;
}

SqueezingResult squeezing_spectrum(const Cavity& cav, const ModeVector& v1, const BipartiteConfig& cfg,
                                   const BipartiteNoise& noise, double omega, int mode, double angle) {
  const auto& cc = cav.config();
  const int d = cav.basis().dim();
  if (mode < 0 || mode >= d) throw ConfigError("homodyne mode index out of range");
  std::vector<int> harm;
  for (const auto& [p, J] : cav.harmonics()) harm.push_back(p);
  const int nh = int(harm.size());
  const int h0 = int(std::find(harm.begin(), harm.end(), 0) - harm.begin());
  if (h0 == nh) throw ConfigError("carrier harmonic missing");
  const int nc = 2 * nh * d + 1;  // vacuum channels plus one loss channel
  const double E = cav.geometry().calE;
  const double J0 = cav.bessel(0);

  struct Coeffs {
    Eigen::VectorXcd A, B;  // on δa_c(ϖ) and δa_c†(ϖ)
    Eigen::Vector2cd u;     // on the thermal quadratures
  };
  // b(ϖ): reflected field of the carrier harmonic in `mode`
  auto build = [&](double w) {
    const auto r = solve_bipartite(cav, v1, cfg, w, MechQuadrature::X, noise.response_scale);
    const ModeDiagonal G = cav.green(0, w);
    const ModeVector a0 = cav.green(0, 0.0).cwiseProduct(v1);
    Coeffs c{Eigen::VectorXcd::Zero(nc), Eigen::VectorXcd::Zero(nc), Eigen::Vector2cd::Zero()};
    const cplx rho = cc.t1 * cc.t1 / cc.r1 * (G(mode) - 1.0) - cc.r1;
    const cplx trans = cc.t1 * cc.t2 * G(mode);
    c.A(h0 * d + mode) = rho;
    c.A((nh + h0) * d + mode) = trans;
    c.A(nc - 1) = std::sqrt(std::max(0.0, 1.0 - std::norm(rho) - std::norm(trans)));
    std::array<cplx, 2> O;
    for (int J = 0; J < 2; ++J) {
      const ModeMatrix gen = cav.to_frame(unit_profile(cav, cfg, J), J + 1, 1);
      const ModeVector dv =
          cav.loop(0) * G.cwiseProduct(cav.phi()).cwiseProduct(gen * a0);
      O[J] = -I * (cc.t1 / cc.r1) * E * J0 * dv(mode) * delay(cav, 1, J + 1, w);
    }
    for (int s = 0; s < 2; ++s) {
      const Eigen::VectorXcd wp = shot_weights(cav, v1, r.sources[2 + s], w);
      const Eigen::VectorXcd wm = shot_weights(cav, v1, r.sources[2 + s], -w);
      for (int J = 0; J < 2; ++J) {
        const cplx f = 0.5 * O[J] * r.T(J, 2 + s);
        c.A.head(nc - 1) += f * wp;
        c.B.head(nc - 1) += f * wm.conjugate();
      }
    }
    for (int th = 0; th < 2; ++th)
      for (int J = 0; J < 2; ++J) c.u(th) += O[J] * r.T(J, th);
    return c;
  };
  const Coeffs p = build(omega);
  const Coeffs m = build(-omega);

  // Q_θ = e^{−iθ} b(ϖ) + e^{iθ} b†(ϖ); V(θ) = S + Re(e^{−2iθ} K)
  double S = 0.0;
  cplx K = 0.0;
  auto add = [&](cplx a, cplx b, double weight) {
    S += weight * (std::norm(a) + std::norm(b));
    K += weight * 2.0 * a * std::conj(b);
  };
  // vacuum cannot be switched off here: shot_on is ignored
  for (int c = 0; c < nc; ++c) {
    add(p.A(c), std::conj(m.B(c)), 0.5);
    add(p.B(c), std::conj(m.A(c)), 0.5);
  }
  if (noise.thermal_on)
    for (int th = 0; th < 2; ++th) {
      const auto tc = thermal_correlations(cfg.modes[th].oscillator, noise.thermal, omega);
      add(p.u(th), std::conj(m.u(th)), tc.XX_sym);
    }

  SqueezingResult res;
  res.omega = omega;
  res.variance = S + (std::exp(-2.0 * I * angle) * K).real();
  res.v_min = S - std::abs(K);
  res.v_max = S + std::abs(K);
  res.angle_min = 0.5 * (std::arg(K) - phys::pi);
  return res;
}

}  // namespace fpcav
