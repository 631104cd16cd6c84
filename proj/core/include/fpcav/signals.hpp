#pragma once

#include <array>
#include <vector>

#include "fpcav/forces.hpp"

namespace fpcav {

/// Demodulated-signal coefficients; the same shape serves the Drever-Pound and quadrant signals.
struct SignalSet {
  double s_static = 0.0;             // s̄
  cplx s_mu;                         // coefficient of the relative intensity fluctuation
  std::array<cplx, kGenCount> s_vec; // coefficients of δα_cav = (δψ, α''_y, α''_z, α'_y, α'_z)
  std::vector<cplx> s_def;           // per mirror profile, frame of mirror 1, no propagation phase
  cplx omega;
};
using DPSignalSet = SignalSet;
using QDSignalSet = SignalSet;

/// s̄ = v†[Σ_p 2J_{p-k}J_p ℑ{e^{iφ} G_p^OUT† Q G_{p-k}^OUT}]v; Q = identity for the DP signal.
double demod_static(const Cavity& cav, const ModeVector& v1, const ModeMatrix* Q);
double dp_static(const Cavity& cav, const ModeVector& v1);
double qd_static(const Cavity& cav, const ModeVector& v1, Axis axis);
/// Quadrant-detector matrix for the cavity basis, cached per (n_max, axis).
const ModeMatrix& quadrant_detector(const Cavity& cav, Axis axis);
/// Undemodulated quadrant difference Σ_p J_p² v†G_p^OUT† Q G_p^OUT v.
double qd_dc(const Cavity& cav, const ModeVector& v1, Axis axis);

/// Response of the demodulated signal to a perturbation generator applied at mirror 1:
/// Σ_p 2J_{p+k}J_p ℜ‡{e^{-iφ}e^{-iψ}R_{p+k} G_p^OUT† Q Ĝ_{p+k} Φ gen G_{p+k}} − (k → −k, φ → −φ).
cplx demod_coefficient(const Cavity& cav, const ModeVector& v1, cplx omega, const ModeMatrix* Q,
                       const ModeMatrix& gen);

DPSignalSet dp_coefficients(const Cavity& cav, const ModeVector& v1, cplx omega,
                            const std::vector<MirrorProfile>& profiles = {});
QDSignalSet qd_coefficients(const Cavity& cav, const ModeVector& v1, cplx omega, Axis axis,
                            const std::vector<MirrorProfile>& profiles = {});

}  // namespace fpcav
