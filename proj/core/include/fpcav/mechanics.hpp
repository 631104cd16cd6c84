#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fpcav/signals.hpp"

namespace fpcav {

/// Suspension degrees of freedom of one mirror: δψ, δψ_y, δψ_z, δϑ_y, δϑ_z.
enum Dof : int { kDofPsi = 0, kDofY = 1, kDofZ = 2, kDofThetaY = 3, kDofThetaZ = 4 };
inline constexpr int kDofCount = 5;
inline constexpr std::array<const char*, kDofCount> kDofNames{"psi", "psi_y", "psi_z", "theta_y",
                                                              "theta_z"};

/// Phase quadrature of the mechanical system: X (positions) or its conjugate Y.
enum class MechQuadrature { X, Y };

/// One damped normal mode of a suspension or of a mirror body.
struct OscillatorMode {
  std::string label = "axial";      // axial, tilt, torsion, transverse, vertical, violin, mirror-internal
  int mirror = 1;                   // 1 or 2
  double mass = 1.0;                // kg, effective mass (I/w² for rotations)
  double omega0 = 1.0;              // rad/s
  double gamma = 0.0;               // 1/s
  std::array<double, kDofCount> K{};  // coupling to each DOF of the mirror

  void validate() const;
};

/// Effective mass of a rotational mode with moment of inertia I (kg m²) seen on a spot w (m).
inline double rotational_mass(double inertia, double w) { return inertia / (w * w); }

/// η = k sqrt(ħ / 2 M ϖ₀).
double lamb_dicke(const OscillatorMode& mode, double k);
/// Optomechanical coupling constant 2√2 η/τ (1/s).
double coupling_constant(const OscillatorMode& mode, double k, double tau);
/// κ = 2√γ/η, weight of the thermal source.
double thermal_weight(const OscillatorMode& mode, double k);

/// χ̃ = ϖ₀η²/(ϖ₀² − ϖ² − iϖγ); the Y version is multiplied by iϖ/ϖ₀.
cplx susceptibility(const OscillatorMode& mode, double k, cplx omega,
                    MechQuadrature quad = MechQuadrature::X);
/// χ̃_μν = Σ_λ K_μλ K_νλ χ̃_λ over the modes of one mirror.
cplx dof_susceptibility(const std::vector<OscillatorMode>& modes, int mirror, int mu, int nu,
                        double k, cplx omega, MechQuadrature quad = MechQuadrature::X);

/// Internal vibration of a mirror: surface profile and its oscillator.
struct MirrorVibMode {
  std::string label;
  ModeMatrix profile;  // ς_Js in the frame of its own mirror (carries 2k); the amplitude is 2k·a
  OscillatorMode oscillator;
};

/// Servo transfer function H(ϖ); inactive servos contribute nothing.
struct ServoTF {
  std::function<cplx(double)> f;

  bool active() const { return static_cast<bool>(f); }
  cplx operator()(cplx omega) const { return f ? f(omega.real()) : cplx(0.0); }
  static ServoTF none() { return {}; }
  static ServoTF constant(cplx gain);
  /// Linear interpolation of (ϖ, H) samples in rad/s; constant outside the table.
  static ServoTF table(std::vector<double> omega, std::vector<cplx> value);
};

struct Servos {
  ServoTF dp;
  std::array<ServoTF, 2> qd;  // y, z
};

/// Suspension catalog plus optional mirror modes, Levin profiles and servos.
struct MechanicsModel {
  std::vector<OscillatorMode> suspension;
  std::vector<MirrorVibMode> mirror_modes;
  std::array<std::optional<ModeMatrix>, 2> levin;  // ς^L per mirror, own frame
  Servos servos;
};

struct LangevinOptions {
  MechQuadrature quad = MechQuadrature::X;
  bool freeze_suspensions = false;  // drop the 10 suspension equations
  bool levin_mirrors = false;       // replace mirror modes by the Levin sources
  bool axial_theta_shot_pairing = false;  // axial force line driven by the θz shot quadrature
  /// −1: radiation pressure lengthens the cavity (δψ falls); +1 flips it.
  double radiation_sign = -1.0;
};

enum class SourceKind { thermal, shot_force, shot_dp, shot_qd, rin, levin };

/// One noise input of the Langevin system.
struct SourceInfo {
  SourceKind kind = SourceKind::thermal;
  std::string name;
  int mirror = 1;
  int oscillator = -1;       // index into suspension (thermal), or mirror_modes when mirror_mode
  bool mirror_mode = false;
  ModeMatrix generator;      // shot_force: weighting operator in the frame of `mirror`
  Axis axis = Axis::y;       // shot_qd
};

/// Generalized coordinate and the operator through which it perturbs the round trip.
struct Coordinate {
  std::string name;
  int mirror = 1;
  int dof = -1;             // suspension DOF, or -1 for a mirror mode
  int mirror_mode = -1;     // index into MechanicsModel::mirror_modes
  ModeMatrix generator;     // own-frame perturbation operator
  bool radiation = true;    // receives a radiation-pressure drive
  double prefactor = 0.0;   // 8ℜ_J for suspensions, 8 for mirror modes
};

/// Linear system A x = B n at one frequency, with observable rows y = C_x x + C_n n.
struct LangevinSystem {
  cplx omega;
  MechQuadrature quad = MechQuadrature::X;
  std::vector<Coordinate> coords;
  std::vector<SourceInfo> sources;
  Eigen::MatrixXcd A;
  Eigen::MatrixXcd B;
  std::vector<std::string> observables;
  Eigen::MatrixXcd obs_x;
  Eigen::MatrixXcd obs_n;
};

/// Coordinate list implied by the model and options.
std::vector<Coordinate> langevin_coordinates(const Cavity& cav, const MechanicsModel& model,
                                             const LangevinOptions& opt);

/// Radiation prefactor multiplying χ: 8ℜ_J (suspension) or 8 (mirror modes).
double radiation_prefactor(const CavityConfig& cfg, int mirror, bool mirror_mode);

/// Coupling K_cc'(ϖ) of coordinate c' onto the generalized force of c, propagation phase included.
cplx coordinate_stiffness(const Cavity& cav, const ModeVector& v1, const Coordinate& c,
                          const Coordinate& cp, cplx omega);

LangevinSystem assemble_langevin(const Cavity& cav, const ModeVector& v1,
                                 const MechanicsModel& model, const LangevinOptions& opt,
                                 cplx omega);

struct TransferResult {
  Eigen::VectorXcd x;
  double residual = 0.0;   // ‖Ax − b‖/‖b‖
  double condition = 0.0;  // 1-norm condition estimate of A
  bool ill_conditioned = false;  // condition > 1e12
};
/// x = A⁻¹ B e_source.
TransferResult solve_transfer(const LangevinSystem& sys, int source);
/// A⁻¹B for all sources; throws SingularityError when A is singular.
Eigen::MatrixXcd solve_all(const LangevinSystem& sys);

/// Modal matrix M(ϖ) = diag(D_λ) − couplings; its zeros are the free oscillations.
Eigen::MatrixXcd modal_matrix(const Cavity& cav, const ModeVector& v1, const MechanicsModel& model,
                              const LangevinOptions& opt, cplx omega);

struct SearchWindow {
  cplx lo, hi;  // rectangle corners in the complex ϖ plane
};
struct FreeOscillation {
  cplx omega;
  bool stable = true;        // Im ϖ < 0 decays under e^{−iϖt}
  bool converged = false;
  double det_residual = 0.0;
  int window = -1;
};
/// Default windows: each mode's ϖ₀ ± max(10γ, ϖ₀/5) along both axes.
std::vector<SearchWindow> default_windows(const MechanicsModel& model, const LangevinOptions& opt);
/// Roots of det M(ϖ) by winding-number subdivision and Newton refinement; feedback is off.
std::vector<FreeOscillation> free_oscillations(const Cavity& cav, const ModeVector& v1,
                                               const MechanicsModel& model,
                                               const LangevinOptions& opt,
                                               const std::vector<SearchWindow>& windows);

}  // namespace fpcav
