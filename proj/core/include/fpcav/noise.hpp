#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "fpcav/mechanics.hpp"

namespace fpcav {

enum class ThermalModelKind { brownian, diosi, gv };
ThermalModelKind parse_thermal_model(const std::string& name);
const char* to_string(ThermalModelKind kind);

struct ThermalModel {
  ThermalModelKind kind = ThermalModelKind::brownian;
  double temperature = 300.0;  // K
  bool include_eta = false;    // keep the η̃ terms of the Diosi model

  void validate() const;
};

/// Double-sided correlations C(ϖ) of one oscillator's thermal quadratures, δ(ϖ+ϖ') stripped.
struct ThermalCorrelation {
  cplx XX, YY, XY, YX;
  double XX_sym = 0.0;      // even part of XX: symmetrized spectral density
  double YY_sym = 0.0;
  cplx XY_sym;
  double commutator = 0.0;  // C(ϖ) − C(−ϖ) = 4ϖ/ϖ_J, shared by all models
};

/// Throws SingularityError at ϖ = 0 for the models with 1/ϖ terms (Diosi, GV).
ThermalCorrelation thermal_correlations(const OscillatorMode& mode, const ThermalModel& model,
                                        double omega);

/// Mirror substrate for the low-frequency Levin noise.
struct MirrorMaterial {
  double young = 7.2e10;     // Pa
  double poisson = 0.17;
  double loss_angle = 1e-6;  // rad

  void validate() const;
};

/// Illumination coefficients P_λ of P(r) = Σ P_λ e^{−r²/2w²} u_λ(r).
using Illumination = std::map<ModeIndex, double>;

/// c_G = (1 − σ²)/(√(2π) E w) in m/N.
double levin_cG(const MirrorMaterial& mat, double w);
/// Expansion coefficient f_αβ of δu_G(r) e^{−r²/2w²}, normalized to f_00 = 1.
double levin_f(int alpha, int beta);
/// f_P = Σ (−1)^{λ'y+λ'z} P_λ P_λ'/P_00² f_{λ+λ'}; 1 for Gaussian illumination.
double illumination_factor(const Illumination& P);
/// (4k_BT/ħϖ)·2ħk c_P φ; the double-sided displacement density fed to the Langevin system is this /(4k).
double levin_psd(const MirrorMaterial& mat, double w, double k, double temperature, double omega,
                 double fP = 1.0);
/// ς^L: deformation profile e^{−ρ}I₀(ρ), ρ = r²/2w², scaled so its fundamental entry is 2k.
ModeMatrix levin_profile(const ModeBasis& basis, double w, double k);

/// Vacuum normalization of the shot quadratures.
/// physical: unit vacuum inputs, intracavity weights (t1, r1 t2) Ĝ and reflected weights (t1 Ĝ^OUT, t2 Ĝ).
/// port_ratio: intracavity (1, t2/t1) Ĝ, reflected t1²(Ĝ^OUT, t2/t1 Ĝ).
enum class ShotNormalization { physical, port_ratio };

/// Weights w of a shot quadrature X = ½(Σ w δa + h.c.) over vacuum channels (port, harmonic, mode).
/// Accepts shot_force, shot_dp and shot_qd sources.
Eigen::VectorXcd shot_weights(const Cavity& cav, const ModeVector& v1, const SourceInfo& src,
                              cplx omega, ShotNormalization norm = ShotNormalization::physical);

struct ShotCorrelations {
  Eigen::MatrixXcd ordered;      // ⟨X_a(ϖ) X_b(−ϖ)⟩ = ¼ w_a w_b†
  Eigen::MatrixXcd symmetrized;  // ½⟨{X_a(ϖ), X_b(−ϖ)}⟩
  Eigen::MatrixXcd commutator;   // ⟨[X_a(ϖ), X_b(−ϖ)]⟩
};
ShotCorrelations shot_correlations(const Cavity& cav, const ModeVector& v1,
                                   const std::vector<SourceInfo>& sources, double omega,
                                   ShotNormalization norm = ShotNormalization::physical);

/// One generalized force quadrature: generator in the frame of its mirror.
struct ForceChannel {
  int mirror = 1;
  ModeMatrix generator;
};
/// Direct matrix contraction c·Σ_p J_p² v_J† G_p† X_i Φ_JJ' |Ĝ_p|² X_i' G_p v_J', ordered;
/// c = 1 + t2²/t1² (port_ratio) or t1² + r1²t2² (physical); Φ_JJ' carries the mirror-2 half trip.
Eigen::MatrixXcd shot_correlation_direct(const Cavity& cav, const ModeVector& v1,
                                         const std::vector<ForceChannel>& channels, double omega,
                                         ShotNormalization norm = ShotNormalization::physical);
/// Same table built by pairing the per-harmonic force projectors row by row.
Eigen::MatrixXcd shot_correlation_projector(const Cavity& cav, const ModeVector& v1,
                                            const std::vector<ForceChannel>& channels, double omega,
                                            ShotNormalization norm = ShotNormalization::physical);

struct NoiseOptions {
  ThermalModel thermal;
  std::array<MirrorMaterial, 2> material;
  std::array<double, 2> illumination{1.0, 1.0};  // f_P per mirror
  double rin_psd = 0.0;          // 1/Hz, double-sided relative intensity density
  bool thermal_on = true;
  bool shot_on = true;
  ShotNormalization shot_norm = ShotNormalization::physical;
};

/// Symmetrized double-sided covariance of the Langevin sources at the system frequency.
Eigen::MatrixXcd source_covariance(const Cavity& cav, const ModeVector& v1,
                                   const MechanicsModel& model, const LangevinSystem& sys,
                                   const NoiseOptions& opt);

struct NoiseSpectrum {
  double omega = 0.0;
  std::vector<std::string> observables;
  Eigen::MatrixXcd csd;                           // single-sided cross-spectral density
  std::map<std::string, Eigen::VectorXd> by_kind; // single-sided PSD per source kind
  double condition = 0.0;
};

/// Observable cross-spectra y = (C_x A⁻¹B + C_n) n at a real frequency.
NoiseSpectrum spectra(const Cavity& cav, const ModeVector& v1, const MechanicsModel& model,
                      const LangevinSystem& sys, const NoiseOptions& opt);

const char* to_string(SourceKind kind);

}  // namespace fpcav
