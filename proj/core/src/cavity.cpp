#include "fpcav/cavity.hpp"

#include <cmath>
#include <sstream>

#include "fpcav/errors.hpp"

namespace fpcav {

void CavityConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (!(L > 0.0)) fail("cavity.length must be positive");
  if (!(lambda > 0.0)) fail("cavity.lambda must be positive");
  if (!(R1 < 0.0)) fail("cavity.R1 must be negative (mirror 1 concave toward the cavity)");
  if (!(R2 > 0.0)) fail("cavity.R2 must be positive");
  for (auto [name, v] : {std::pair{"r1", r1}, {"t1", t1}, {"r2", r2}, {"t2", t2}})
    if (!(v > 0.0 && v < 1.0)) fail(std::string("cavity.") + name + " must lie in (0,1)");
  if (r1 * r1 + t1 * t1 + A1 > 1.0 + 1e-12) fail("mirror 1: r1² + t1² + A1 exceeds 1");
  if (r2 * r2 + t2 * t2 + A2 > 1.0 + 1e-12) fail("mirror 2: r2² + t2² + A2 exceeds 1");
  if (A1 < 0.0 || A2 < 0.0) fail("absorption must be non-negative");
  if (!(power >= 0.0)) fail("laser.power must be non-negative");
  if (mod_depth < 0.0) fail("modulation.depth must be non-negative");
  if (demod_k <= 0 || demod_k % 2 == 0) fail("modulation.demod_k must be a positive odd integer");
  if (p_max < 0) fail("modulation.p_max must be non-negative");
}

std::pair<double, double> mirror_from_finesse(double finesse, FinesseConvention conv,
                                              double absorption) {
  if (!(finesse > 0.0)) throw ConfigError("finesse must be positive");
  double R = 0.0;
  if (conv == FinesseConvention::log) {
    R = std::exp(-phys::pi / finesse);
  } else {
    // π sqrt(R)/(1-R) = F  ⇒  sqrt(R) = (-π + sqrt(π² + 4F²))/(2F)
    const double s = (-phys::pi + std::sqrt(phys::pi * phys::pi + 4.0 * finesse * finesse)) /
                     (2.0 * finesse);
    R = s * s;
  }
  const double r = std::sqrt(R);
  const double t2 = 1.0 - R - absorption;
  if (!(t2 > 0.0)) throw ConfigError("finesse and absorption leave no transmission");
  return {r, std::sqrt(t2)};
}

DerivedGeometry derive_geometry(const CavityConfig& cfg) {
  cfg.validate();
  DerivedGeometry g;
  const double L = cfg.L, lam = cfg.lambda;
  g.g1 = 1.0 + L / cfg.R1;
  g.g2 = 1.0 - L / cfg.R2;
  const double gg = g.g1 * g.g2;
  if (!(gg >= 0.0 && gg <= 1.0)) {
    std::ostringstream os;
    os << "unstable resonator: g1*g2 = " << gg << " outside [0,1]";
    throw ConfigError(os.str());
  }
  g.near_unstable = gg < 1e-6 || gg > 1.0 - 1e-6;
  const double sgn = g.g1 < 0.0 ? -1.0 : 1.0;
  g.phi_G = std::acos(sgn * std::sqrt(gg));

  const double den = g.g1 + g.g2 - 2.0 * gg;
  if (g.g1 == 0.0 && g.g2 == 0.0) {
    // symmetric confocal limit
    g.w1 = g.w2 = std::sqrt(L * lam / (2.0 * phys::pi));
    g.x0 = L / 2.0;
    g.b = L / 2.0;
  } else {
    const double base = L * lam / (2.0 * phys::pi);
    g.w1 = std::sqrt(base * std::sqrt(g.g2 / (g.g1 * (1.0 - gg))));
    g.w2 = std::sqrt(base * std::sqrt(g.g1 / (g.g2 * (1.0 - gg))));
    g.x0 = L * g.g2 * (1.0 - g.g1) / den;
    g.b = std::sqrt(L * L * gg * (1.0 - gg) / (den * den));
  }
  for (double v : {g.w1, g.w2, g.x0, g.b, g.phi_G})
    if (!std::isfinite(v)) throw ConfigError("resonator at a stability boundary: derived mode is not finite");

  g.tau = 2.0 * L / phys::c;
  g.R_loop = cfg.r1 * cfg.r2;
  const double lnR = std::log(g.R_loop);
  g.finesse_pi_lnR = -phys::pi * lnR;
  g.finesse_log = -phys::pi / lnR;
  g.finesse_standard = phys::pi * std::sqrt(g.R_loop) / (1.0 - g.R_loop);
  g.k = cfg.wavenumber();
  g.E_amp = std::sqrt(cfg.power / (phys::hbar * cfg.omega_laser()));
  g.calE = cfg.t1 * g.E_amp;
  return g;
}

std::map<int, double> harmonic_weights(double M, double cutoff, int p_max) {
  if (M < 0.0) throw ConfigError("modulation depth must be non-negative");
  std::map<int, double> out;
  for (int p = 0; p <= p_max; ++p) {
    const double j = p == 0 ? std::cyl_bessel_j(0.0, M) : std::cyl_bessel_j(double(p), M);
    if (std::abs(j) < cutoff) {
      if (double(p) > M) break;  // past the turning point J_p decays monotonically
      continue;
    }
    out[p] = j;
    if (p > 0) out[-p] = (p % 2 ? -j : j);
  }
  return out;
}

Cavity::Cavity(const CavityConfig& cfg, int n_max)
    : cfg_(cfg), geom_(derive_geometry(cfg)), basis_(n_max), quad_(quadrature_matrices(basis_)) {
  phi_ = gouy_diagonal(basis_, geom_.phi_G);
  phi_half_ = gouy_diagonal(basis_, geom_.phi_G / 2.0);
  harm_ = harmonic_weights(cfg.mod_depth, cfg.bessel_cutoff, cfg.p_max);
  psi_rt_ = cfg.psi - 2.0 * geom_.phi_G;
}

double Cavity::bessel(int p) const {
  auto it = harm_.find(p);
  return it == harm_.end() ? 0.0 : it->second;
}

cplx Cavity::R_p(int p) const {
  return std::exp(I * (p * cfg_.mod_freq * geom_.tau)) * geom_.R_loop;
}

ModeDiagonal Cavity::green(int p, cplx omega) const {
  const cplx a = loop(p) * std::exp(I * omega * geom_.tau);
  ModeDiagonal g(basis_.dim());
  for (int i = 0; i < basis_.dim(); ++i) {
    const cplx den = 1.0 - a * phi_(i);
    if (std::abs(den) < 1e-9) {
      std::ostringstream os;
      os << "cavity pole: mode (" << basis_.mode(i).ly << "," << basis_.mode(i).lz
         << ") harmonic " << p << " at omega " << omega;
      throw SingularityError(os.str(), std::abs(den));
    }
    g(i) = 1.0 / den;
  }
  return g;
}

ModeDiagonal Cavity::green_out(int p, cplx omega) const {
  return green(p, omega).array() - cfg_.r1 / (cfg_.t1 * cfg_.t1);
}

ModeMatrix Cavity::green_perturb(int p, cplx omega, const ModeMatrix& gen) const {
  const ModeDiagonal g = green(p, omega);
  const ModeDiagonal left = loop(p) * g.cwiseProduct(phi_);
  return left.asDiagonal() * gen * g.asDiagonal();
}

ModeMatrix Cavity::to_frame(const ModeMatrix& op, int from, int to) const {
  if (from == to) return op;
  // the other mirror sits half a round trip downstream of either reference mirror
  return phi_half_.conjugate().asDiagonal() * op * phi_half_.asDiagonal();
}

ModeMatrix green_static(const Cavity& cav, int p, cplx omega) {
  return cav.green(p, omega).asDiagonal();
}

ModeMatrix green_out(const Cavity& cav, int p, cplx omega) {
  return cav.green_out(p, omega).asDiagonal();
}

ModeMatrix green_perturb(const Cavity& cav, int p, cplx omega, const ModeMatrix& gen) {
  return cav.green_perturb(p, omega, gen);
}

}  // namespace fpcav
