#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace fpcav {

using cplx = std::complex<double>;
using ModeMatrix = Eigen::MatrixXcd;
using ModeVector = Eigen::VectorXcd;
/// Diagonal of a diagonal mode matrix.
using ModeDiagonal = Eigen::VectorXcd;

inline constexpr cplx I{0.0, 1.0};

namespace phys {
inline constexpr double c = 299792458.0;          // m/s
inline constexpr double hbar = 1.054571817e-34;   // J s
inline constexpr double kB = 1.380649e-23;        // J/K
inline constexpr double pi = std::numbers::pi;
}  // namespace phys

}  // namespace fpcav
