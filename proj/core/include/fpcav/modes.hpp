#pragma once

#include <compare>
#include <functional>
#include <string>
#include <vector>

#include "fpcav/types.hpp"

namespace fpcav {

/// Hermite-Gauss transverse order (ly, lz).
struct ModeIndex {
  int ly = 0;
  int lz = 0;
  int order() const { return ly + lz; }
  auto operator<=>(const ModeIndex&) const = default;
};

enum class Axis { y, z };

/// Truncated Hermite-Gauss basis, graded-lex ordered (by ly+lz, then by ly).
class ModeBasis {
 public:
  explicit ModeBasis(int n_max);

  int n_max() const { return n_max_; }
  int dim() const { return static_cast<int>(modes_.size()); }
  const ModeIndex& mode(int i) const { return modes_[static_cast<size_t>(i)]; }
  /// Dense index of (ly, lz), or -1 when outside the truncation.
  int index(int ly, int lz) const;
  int index(const ModeIndex& m) const { return index(m.ly, m.lz); }
  /// Modes strictly inside the truncation (ly+lz < n_max).
  bool interior(int i) const { return mode(i).order() < n_max_; }
  static std::string ordering() { return "graded-lex (ly+lz, then ly descending)"; }

 private:
  int n_max_;
  std::vector<ModeIndex> modes_;
};

ModeBasis build_basis(int n_max);

/// Annihilation operator B_q: entry (λ-e_q, λ) = sqrt(λ_q).
ModeMatrix ladder_matrix(const ModeBasis& basis, Axis axis);

/// Phase quadratures X_q = B_q + B_q^†, Y_q = i(B_q - B_q^†).
struct Quadratures {
  ModeMatrix Xy, Xz, Yy, Yz;
  const ModeMatrix& X(Axis a) const { return a == Axis::y ? Xy : Xz; }
  const ModeMatrix& Y(Axis a) const { return a == Axis::y ? Yy : Yz; }
};
Quadratures quadrature_matrices(const ModeBasis& basis);

/// Φ_λ = exp(-i 2 (ly+lz+1) φ_G), returned as the diagonal.
ModeDiagonal gouy_diagonal(const ModeBasis& basis, double phi_G);
ModeMatrix gouy_matrix(const ModeBasis& basis, double phi_G);

/// D(-α) = exp(-Σ_q α_q B_q^† + α_q^* B_q), computed by scaling and squaring.
ModeMatrix displacement_matrix(const ModeBasis& basis, cplx alpha_y, cplx alpha_z);

/// Complex curvature radius: 1/Q = 1/R + i/(k w^2), with u ∝ exp(-r²/2w²).
cplx complex_radius(double R, double w, double k);

struct InputBeam {
  double theta_y = 0.0;  // rad, tilt against the cavity axis
  double theta_z = 0.0;  // rad
  double eps_y = 0.0;    // m, offset at mirror 1
  double eps_z = 0.0;    // m
  cplx Q_y;              // m, input-beam complex curvature, y
  cplx Q_z;              // m, input-beam complex curvature, z
  cplx Q1;               // m, cavity-mode complex curvature at mirror 1
  double R1 = 0.0;       // m, mirror 1 curvature radius (phase reference)
  double w1 = 0.0;       // m, cavity spot size at mirror 1
  double k = 0.0;        // 1/m, laser wavenumber
};

/// Beam matched to the cavity mode at mirror 1, with no tilt or offset.
InputBeam matched_beam(double R1, double w1, double k);

/// Mismatch parameter δ_q = sqrt(1 + i (2/k w1²) Q_q Q1^*/(Q_q - Q1^*)).
cplx mismatch_delta(cplx Q_q, cplx Q1, double k, double w1);

/// First-order coupling into (1,0)/(0,1): i k w1 (θ_q - ε_q/Q_q)/sqrt(2).
cplx misalignment_amplitude(const InputBeam& beam, Axis axis);

/// Unit-norm projection of the input beam on the basis, phase fixed so v_00 is real ≥ 0.
ModeVector input_vector(const ModeBasis& basis, const InputBeam& beam);

/// Real scalar field over the transverse plane (m, m) -> value.
struct Surface {
  std::function<double(double, double)> f;
  std::vector<double> y_breaks;  // m, lines y = const where f is discontinuous
  std::vector<double> z_breaks;  // m
};

struct OverlapOptions {
  int points = 64;      // initial nodes per axis
  int max_points = 512;
  double tol = 1e-10;   // max-norm change between refinements
};

/// ∫ u_λ f u_λ' d²r over orthonormal modes of spot size w.
ModeMatrix plain_overlap(const ModeBasis& basis, const Surface& surface, double w,
                         const OverlapOptions& opt = {});

/// Deformation matrix ς = 2k ∫ u_λ δu u_λ' d²r.
ModeMatrix overlap_matrix(const ModeBasis& basis, const Surface& surface, double w, double k,
                          const OverlapOptions& opt = {});

/// Quadrant-detector matrix Q_q = ∫ u_λ sgn(q) u_λ' d²r.
ModeMatrix quadrant_matrix(const ModeBasis& basis, Axis axis);

namespace quad {
/// Nodes and weights with ∫ f(x) dx ≈ Σ w_i f(x_i) for f ~ exp(-x²)·poly (weights carry e^{x²}).
struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};
Rule gauss_hermite_scaled(int n);
Rule gauss_legendre(int n, double a, double b);
/// Orthonormal Hermite functions ψ_0..ψ_n at x (ψ_n includes exp(-x²/2)).
std::vector<double> hermite_functions(int n, double x);
}  // namespace quad

}  // namespace fpcav
