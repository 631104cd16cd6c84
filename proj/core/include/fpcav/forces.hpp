#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "fpcav/cavity.hpp"

namespace fpcav {

/// Components of the perturbation vector 𝔛 = (1, X_y, X_z, Y_y, Y_z),
/// paired with (δψ, α''_y, α''_z, α'_y, α'_z).
enum Gen : int { kPsi = 0, kXy = 1, kXz = 2, kYy = 3, kYz = 4 };
inline constexpr int kGenCount = 5;
inline constexpr std::array<const char*, kGenCount> kGenNames{"psi", "Xy", "Xz", "Yy", "Yz"};

std::array<ModeMatrix, kGenCount> generator_set(const Cavity& cav);

/// (-1)^J, the transverse sign of mirror J ∈ {1,2}.
inline double parity(int J) { return J % 2 ? -1.0 : 1.0; }
/// Sign of δψ_J = axial_sign(J) 2k δx_J: a displacement shortening the cavity raises ψ.
inline double axial_sign(int J) { return -parity(J); }
/// ℜ_J = r_J² + A_J/2.
double mirror_R(const CavityConfig& cfg, int J);

struct StaticForces {
  ModeMatrix F0;   // Σ J_p² G_p† G_p
  ModeMatrix T0y;  // Σ J_p² G_p† X_y G_p
  ModeMatrix T0z;
};
StaticForces static_force_matrices(const Cavity& cav);

/// Σ_p 2J_p² ℑ‡{e^{-iψ} R_p G_p† L Ĝ_p(ϖ) Φ gen G_p}; L = identity when null.
ModeMatrix stiffness_operator(const Cavity& cav, cplx omega, const ModeMatrix* left,
                              const ModeMatrix& gen);

/// Same quantity contracted as a†(…)b without forming the matrix.
cplx stiffness_scalar(const Cavity& cav, cplx omega, const ModeVector& a, const ModeMatrix* left,
                      const ModeMatrix& gen, const ModeVector& b);

struct StiffnessMatrices {
  std::array<ModeMatrix, kGenCount> F;
  std::array<ModeMatrix, kGenCount> Ty;
  std::array<ModeMatrix, kGenCount> Tz;
  cplx omega;
};
StiffnessMatrices stiffness_matrices(const Cavity& cav, cplx omega);

/// Stiffness scalars; index [J-1] for mirrors, [q] with 0 = y, 1 = z.
struct StiffnessSet {
  std::array<std::array<cplx, kGenCount>, 2> F{};
  std::array<std::array<std::array<cplx, kGenCount>, 2>, 2> T{};
  cplx omega;
};
StiffnessSet contract(const StiffnessMatrices& m, const ModeVector& v1, const ModeVector& v2);
StiffnessSet stiffness(const Cavity& cav, const ModeVector& v1, cplx omega);

/// Mirror vibrational profile ς (carries 2k) on mirror 1 or 2.
struct MirrorProfile {
  std::string label;
  int mirror = 1;
  ModeMatrix sigma;
};

/// F^DEF_{Js,J's'} = v_J† [Σ 2J_p² ℑ‡{e^{-iψ}R_p G†ς_Js Ĝ Φ ς_J's' G}] v_J, profiles in frame J.
/// Propagation phases e^{iϖτ}, e^{iϖτ/2} are applied by the Langevin assembly.
Eigen::MatrixXcd deformation_forces(const Cavity& cav, const ModeVector& v1,
                                    const std::vector<MirrorProfile>& profiles, cplx omega);

/// Row vectors r_p = (2J_p/t1) v_J† G_p† X per harmonic.
struct ShotProjector {
  std::map<int, Eigen::RowVectorXcd> rows;
};
ShotProjector shot_force_projector(const Cavity& cav, const ModeVector& vJ, const ModeMatrix* gen);

/// First-order small-misalignment reduction built from diagonal Green-function entries.
StiffnessSet small_misalignment_stiffness(const Cavity& cav, cplx v1y, cplx v1z, cplx omega);

/// Static force (N) per unit dimensionless force, ℰ² 2ℜ_J ħ k.
double force_scale(const Cavity& cav, int J);

}  // namespace fpcav
