#pragma once

#include <map>
#include <string>

#include "fpcav/modes.hpp"

namespace fpcav {

enum class FinesseConvention { log, standard };

struct CavityConfig {
  double L = 0.05;            // m
  double R1 = -0.05;          // m, negative for a mirror concave toward the cavity
  double R2 = 0.05;           // m
  double lambda = 1.064e-6;   // m
  double r1 = 0.99686;        // amplitude reflectivity, mirror 1
  double t1 = 0.0791;         // amplitude transmissivity, mirror 1
  double r2 = 0.99686;
  double t2 = 0.0791;
  double A1 = 0.0;            // power absorption, mirror 1
  double A2 = 0.0;
  double psi = 0.0;           // rad, detuning from the fundamental-mode resonance
  double power = 1.0;         // W
  double mod_freq = 0.0;      // rad/s, Λ
  double mod_depth = 0.0;     // M
  int p_max = 20;             // harmonic cap
  double bessel_cutoff = 1e-12;
  int demod_k = 1;            // odd harmonic used for demodulation
  double demod_phase = 0.0;   // rad, φ

  double wavenumber() const { return 2.0 * phys::pi / lambda; }
  double omega_laser() const { return phys::c * wavenumber(); }
  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

/// Mirror amplitude coefficients (r, t) for a symmetric cavity of given finesse.
/// log: R = r² = exp(-π/F); standard: F = π sqrt(R)/(1 - R).
std::pair<double, double> mirror_from_finesse(double finesse, FinesseConvention conv,
                                              double absorption = 0.0);

struct DerivedGeometry {
  double tau = 0.0;              // s, round trip 2L/c
  double g1 = 0.0, g2 = 0.0;
  double phi_G = 0.0;            // rad, single-trip Gouy phase
  double w1 = 0.0, w2 = 0.0;     // m, spot sizes (u ∝ exp(-r²/2w²))
  double b = 0.0;                // m, Rayleigh range of the cavity mode
  double x0 = 0.0;               // m, waist position measured from mirror 1
  double R_loop = 0.0;           // r1 r2
  double finesse_pi_lnR = 0.0;  // -π ln R
  double finesse_log = 0.0;    // -π / ln R
  double finesse_standard = 0.0; // π sqrt(R)/(1 - R)
  double k = 0.0;                // 1/m
  double E_amp = 0.0;            // Hz^1/2, sqrt(P/ħω)
  double calE = 0.0;             // Hz^1/2, t1 E
  bool near_unstable = false;    // g1 g2 within 1e-6 of 0 or 1
};

DerivedGeometry derive_geometry(const CavityConfig& cfg);

/// Bessel weights J_p(M) for |J_p| ≥ cutoff and |p| ≤ p_max.
std::map<int, double> harmonic_weights(double M, double cutoff, int p_max = 64);

/// Cavity field propagators over a truncated mode basis.
class Cavity {
 public:
  Cavity(const CavityConfig& cfg, int n_max);

  const CavityConfig& config() const { return cfg_; }
  const DerivedGeometry& geometry() const { return geom_; }
  const ModeBasis& basis() const { return basis_; }
  const Quadratures& quadratures() const { return quad_; }
  const ModeDiagonal& phi() const { return phi_; }
  const ModeDiagonal& phi_half() const { return phi_half_; }
  const std::map<int, double>& harmonics() const { return harm_; }
  double bessel(int p) const;
  /// Round-trip phase such that exp(-i psi_rt) Φ_00 = exp(-i psi).
  double psi_rt() const { return psi_rt_; }
  /// R_p = exp(i p Λ τ) R.
  cplx R_p(int p) const;
  /// exp(-i psi_rt) R_p, the scalar round-trip factor.
  cplx loop(int p) const { return std::exp(-I * psi_rt_) * R_p(p); }

  /// Ĝ_p(ϖ) = (1 - R_p e^{-iψ} e^{iϖτ} Φ)^{-1}, as a diagonal.
  ModeDiagonal green(int p, cplx omega) const;
  /// Ĝ_p^OUT(ϖ) = Ĝ_p(ϖ) - r1/t1².
  ModeDiagonal green_out(int p, cplx omega) const;
  /// 𝔊 = e^{-iψ} R_p Ĝ Φ gen Ĝ.
  ModeMatrix green_perturb(int p, cplx omega, const ModeMatrix& gen) const;
  /// Mirror-2 view of a mirror-1 vector: Φ^{1/2} v.
  ModeVector to_mirror2(const ModeVector& v1) const { return phi_half_.cwiseProduct(v1); }
  /// Operator applied at mirror `from`, moved to the round trip that starts at mirror `to`.
  ModeMatrix to_frame(const ModeMatrix& op, int from, int to) const;

 private:
  CavityConfig cfg_;
  DerivedGeometry geom_;
  ModeBasis basis_;
  Quadratures quad_;
  ModeDiagonal phi_, phi_half_;
  std::map<int, double> harm_;
  double psi_rt_;
};

ModeMatrix green_static(const Cavity& cav, int p, cplx omega);
ModeMatrix green_out(const Cavity& cav, int p, cplx omega);
ModeMatrix green_perturb(const Cavity& cav, int p, cplx omega, const ModeMatrix& gen);

/// ‡ conjugation: scalars f*(−ω*), matrices O†(−ω*).
inline cplx dagger_value(cplx v) { return std::conj(v); }
inline ModeMatrix dagger_value(const ModeMatrix& m) { return m.adjoint(); }

/// ℜ‡{f}(ω) = (f(ω) + f‡(ω))/2.
template <class F>
auto re_dagger(F&& f, cplx omega) {
  auto a = f(omega);
  auto b = f(-std::conj(omega));
  return decltype(a)((a + dagger_value(b)) / 2.0);
}

/// ℑ‡{f}(ω) = (f(ω) - f‡(ω))/2i.
template <class F>
auto im_dagger(F&& f, cplx omega) {
  auto a = f(omega);
  auto b = f(-std::conj(omega));
  return decltype(a)((a - dagger_value(b)) / (2.0 * I));
}

}  // namespace fpcav
