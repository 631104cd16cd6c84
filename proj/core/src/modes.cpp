#include "fpcav/modes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include <unsupported/Eigen/MatrixFunctions>

#include "fpcav/errors.hpp"

namespace fpcav {

ModeBasis::ModeBasis(int n_max) : n_max_(n_max) {
  if (n_max < 0) throw ConfigError("n_max must be non-negative");
  for (int n = 0; n <= n_max; ++n)
    for (int ly = n; ly >= 0; --ly) modes_.push_back({ly, n - ly});
}

int ModeBasis::index(int ly, int lz) const {
  if (ly < 0 || lz < 0 || ly + lz > n_max_) return -1;
  const int n = ly + lz;
  return n * (n + 1) / 2 + (n - ly);
}

ModeBasis build_basis(int n_max) { return ModeBasis(n_max); }

ModeMatrix ladder_matrix(const ModeBasis& basis, Axis axis) {
  ModeMatrix B = ModeMatrix::Zero(basis.dim(), basis.dim());
  for (int i = 0; i < basis.dim(); ++i) {
    const ModeIndex m = basis.mode(i);
    const int l = axis == Axis::y ? m.ly : m.lz;
    if (l == 0) continue;
    const int j = axis == Axis::y ? basis.index(m.ly - 1, m.lz) : basis.index(m.ly, m.lz - 1);
    B(j, i) = std::sqrt(static_cast<double>(l));
  }
  return B;
}

Quadratures quadrature_matrices(const ModeBasis& basis) {
  const ModeMatrix By = ladder_matrix(basis, Axis::y);
  const ModeMatrix Bz = ladder_matrix(basis, Axis::z);
  return {By + By.adjoint(), Bz + Bz.adjoint(), I * (By - By.adjoint()), I * (Bz - Bz.adjoint())};
}

ModeDiagonal gouy_diagonal(const ModeBasis& basis, double phi_G) {
  ModeDiagonal d(basis.dim());
  for (int i = 0; i < basis.dim(); ++i)
    d(i) = std::exp(-I * (2.0 * (basis.mode(i).order() + 1) * phi_G));
  return d;
}

ModeMatrix gouy_matrix(const ModeBasis& basis, double phi_G) {
  return gouy_diagonal(basis, phi_G).asDiagonal();
}

ModeMatrix displacement_matrix(const ModeBasis& basis, cplx alpha_y, cplx alpha_z) {
  const ModeMatrix By = ladder_matrix(basis, Axis::y);
  const ModeMatrix Bz = ladder_matrix(basis, Axis::z);
  const ModeMatrix gen = -alpha_y * By.adjoint() + std::conj(alpha_y) * By -
                         alpha_z * Bz.adjoint() + std::conj(alpha_z) * Bz;
  return gen.exp();
}

cplx complex_radius(double R, double w, double k) {
  const cplx inv = (std::isinf(R) ? 0.0 : 1.0 / R) + I / (k * w * w);
  return 1.0 / inv;
}

InputBeam matched_beam(double R1, double w1, double k) {
  InputBeam b;
  b.Q1 = complex_radius(R1, w1, k);
  b.Q_y = b.Q1;
  b.Q_z = b.Q1;
  b.R1 = R1;
  b.w1 = w1;
  b.k = k;
  return b;
}

cplx mismatch_delta(cplx Q_q, cplx Q1, double k, double w1) {
  const cplx den = Q_q - std::conj(Q1);
  if (std::abs(den) <= 1e-12 * std::abs(Q1))
    throw SingularityError("degenerate mismatch: Q_q equals conj(Q1)", std::abs(den));
  return std::sqrt(1.0 + I * (2.0 / (k * w1 * w1)) * Q_q * std::conj(Q1) / den);
}

cplx misalignment_amplitude(const InputBeam& b, Axis axis) {
  const double theta = axis == Axis::y ? b.theta_y : b.theta_z;
  const double eps = axis == Axis::y ? b.eps_y : b.eps_z;
  const cplx Q = axis == Axis::y ? b.Q_y : b.Q_z;
  return I * b.k * b.w1 * (theta - eps / Q) / std::sqrt(2.0);
}

namespace quad {

std::vector<double> hermite_functions(int n, double x) {
  std::vector<double> psi(static_cast<size_t>(n) + 1);
  psi[0] = std::pow(phys::pi, -0.25) * std::exp(-0.5 * x * x);
  if (n >= 1) psi[1] = std::sqrt(2.0) * x * psi[0];
  for (int k = 1; k < n; ++k)
    psi[k + 1] = std::sqrt(2.0 / (k + 1)) * x * psi[k] - std::sqrt(double(k) / (k + 1)) * psi[k - 1];
  return psi;
}

namespace {

std::mutex cache_mutex;
std::map<int, Rule> hermite_cache;
std::map<int, Rule> legendre_cache;

Eigen::VectorXd tridiagonal_nodes(int n, const std::function<double(int)>& offdiag,
                                  Eigen::VectorXd* first_components) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  for (int i = 0; i + 1 < n; ++i) sub(i) = offdiag(i + 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, first_components ? Eigen::ComputeEigenvectors
                                                        : Eigen::EigenvaluesOnly);
  if (first_components) *first_components = es.eigenvectors().row(0).transpose();
  return es.eigenvalues();
}

}  // namespace

Rule gauss_hermite_scaled(int n) {
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = hermite_cache.find(n);
    if (it != hermite_cache.end()) return it->second;
  }
  Eigen::VectorXd x = tridiagonal_nodes(n, [](int i) { return std::sqrt(i / 2.0); }, nullptr);
  Rule r;
  for (int i = 0; i < n; ++i) {
    double xi = x(i);
    // Newton polish on ψ_n(x) = 0; ψ_n' = sqrt(2n) ψ_{n-1} - x ψ_n.
    for (int it = 0; it < 3; ++it) {
      auto psi = hermite_functions(n, xi);
      const double d = std::sqrt(2.0 * n) * psi[n - 1] - xi * psi[n];
      if (d == 0.0) break;
      xi -= psi[n] / d;
    }
    auto psi = hermite_functions(n - 1, xi);
    double s = 0.0;
    for (double p : psi) s += p * p;
    r.x.push_back(xi);
    r.w.push_back(1.0 / s);
  }
  std::lock_guard<std::mutex> lock(cache_mutex);
  hermite_cache.emplace(n, r);
  return r;
}

Rule gauss_legendre(int n, double a, double b) {
  Rule ref;
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = legendre_cache.find(n);
    if (it != legendre_cache.end()) ref = it->second;
  }
  if (ref.x.empty()) {
    Eigen::VectorXd v0;
    Eigen::VectorXd x = tridiagonal_nodes(
        n, [](int k) { return k / std::sqrt(4.0 * k * k - 1.0); }, &v0);
    for (int i = 0; i < n; ++i) {
      ref.x.push_back(x(i));
      ref.w.push_back(2.0 * v0(i) * v0(i));
    }
    std::lock_guard<std::mutex> lock(cache_mutex);
    legendre_cache.emplace(n, ref);
  }
  Rule r;
  const double h = 0.5 * (b - a), m = 0.5 * (a + b);
  for (size_t i = 0; i < ref.x.size(); ++i) {
    r.x.push_back(m + h * ref.x[i]);
    r.w.push_back(h * ref.w[i]);
  }
  return r;
}

}  // namespace quad

namespace {

/// 1-D rule in the scaled coordinate ξ = q/w. Breaks (in ξ) trigger composite Gauss-Legendre.
quad::Rule axis_rule(int points, int n_max, const std::vector<double>& breaks) {
  if (breaks.empty()) return quad::gauss_hermite_scaled(points);
  const double X = std::sqrt(2.0 * n_max + 1.0) + 10.0;
  std::vector<double> cuts{-X};
  for (double b : breaks)
    if (b > -X && b < X) cuts.push_back(b);
  cuts.push_back(X);
  std::sort(cuts.begin(), cuts.end());
  quad::Rule r;
  const int per_panel = std::max(8, points / static_cast<int>(cuts.size() - 1));
  for (size_t p = 0; p + 1 < cuts.size(); ++p) {
    if (cuts[p + 1] - cuts[p] <= 0.0) continue;
    auto g = quad::gauss_legendre(per_panel, cuts[p], cuts[p + 1]);
    r.x.insert(r.x.end(), g.x.begin(), g.x.end());
    r.w.insert(r.w.end(), g.w.begin(), g.w.end());
  }
  return r;
}

/// Table P(n, i) = ψ_n(x_i) for n ≤ n_max.
Eigen::MatrixXd hermite_table(int n_max, const std::vector<double>& x) {
  Eigen::MatrixXd P(n_max + 1, static_cast<Eigen::Index>(x.size()));
  for (size_t i = 0; i < x.size(); ++i) {
    auto psi = quad::hermite_functions(n_max, x[i]);
    for (int n = 0; n <= n_max; ++n) P(n, static_cast<Eigen::Index>(i)) = psi[n];
  }
  return P;
}

ModeMatrix overlap_at(const ModeBasis& basis, const Surface& s, double w, int points) {
  const int n = basis.n_max();
  std::vector<double> yb, zb;
  for (double b : s.y_breaks) yb.push_back(b / w);
  for (double b : s.z_breaks) zb.push_back(b / w);
  const quad::Rule ry = axis_rule(points, n, yb);
  const quad::Rule rz = axis_rule(points, n, zb);
  const Eigen::Index Ny = static_cast<Eigen::Index>(ry.x.size());
  const Eigen::Index Nz = static_cast<Eigen::Index>(rz.x.size());
  Eigen::MatrixXd A(Ny, Nz);
  for (Eigen::Index i = 0; i < Ny; ++i)
    for (Eigen::Index j = 0; j < Nz; ++j)
      A(i, j) = ry.w[i] * rz.w[j] * s.f(w * ry.x[i], w * rz.x[j]);
  const Eigen::MatrixXd Py = hermite_table(n, ry.x);
  const Eigen::MatrixXd Pz = hermite_table(n, rz.x);
  const int np = (n + 1) * (n + 1);
  Eigen::MatrixXd Ry(np, Ny), Rz(np, Nz);
  for (int a = 0; a <= n; ++a)
    for (int b = 0; b <= n; ++b) {
      Ry.row(a * (n + 1) + b) = Py.row(a).cwiseProduct(Py.row(b));
      Rz.row(a * (n + 1) + b) = Pz.row(a).cwiseProduct(Pz.row(b));
    }
  const Eigen::MatrixXd T = Ry * A * Rz.transpose();
  ModeMatrix M(basis.dim(), basis.dim());
  for (int i = 0; i < basis.dim(); ++i)
    for (int j = 0; j < basis.dim(); ++j) {
      const ModeIndex a = basis.mode(i), b = basis.mode(j);
      M(i, j) = T(a.ly * (n + 1) + b.ly, a.lz * (n + 1) + b.lz);
    }
  return M;
}

}  // namespace

ModeMatrix plain_overlap(const ModeBasis& basis, const Surface& surface, double w,
                         const OverlapOptions& opt) {
  if (!(w > 0.0)) throw ConfigError("overlap: spot size must be positive");
  int pts = opt.points;
  ModeMatrix prev = overlap_at(basis, surface, w, pts);
  double change = 0.0;
  while (pts < opt.max_points) {
    pts = std::min(opt.max_points, pts * 3 / 2);
    ModeMatrix next = overlap_at(basis, surface, w, pts);
    change = (next - prev).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, next.cwiseAbs().maxCoeff());
    prev = std::move(next);
    if (change < opt.tol * scale) return prev;
  }
  throw ConvergenceError("overlap quadrature did not converge", change);
}

ModeMatrix overlap_matrix(const ModeBasis& basis, const Surface& surface, double w, double k,
                          const OverlapOptions& opt) {
  return 2.0 * k * plain_overlap(basis, surface, w, opt);
}

ModeMatrix quadrant_matrix(const ModeBasis& basis, Axis axis) {
  Surface s;
  if (axis == Axis::y) {
    s.f = [](double y, double) { return y > 0 ? 1.0 : (y < 0 ? -1.0 : 0.0); };
    s.y_breaks = {0.0};
  } else {
    s.f = [](double, double z) { return z > 0 ? 1.0 : (z < 0 ? -1.0 : 0.0); };
    s.z_breaks = {0.0};
  }
  return plain_overlap(basis, s, 1.0);
}

namespace {

/// Projections c_n = ∫ u_n(q) f(q) dq of one transverse factor of the input beam.
Eigen::VectorXcd axis_projection(int n_max, double theta, double eps, cplx Q, const InputBeam& b) {
  const cplx invQ = 1.0 / Q;
  if (!(invQ.imag() > 0.0))
    throw SingularityError("input beam is not normalizable (Im 1/Q <= 0)", invQ.imag());
  const double invR1 = std::isinf(b.R1) ? 0.0 : 1.0 / b.R1;
  auto f = [&](double y) {
    return std::exp(I * b.k * ((y - eps) * (y - eps) * invQ / 2.0 - y * y * invR1 / 2.0 + theta * y));
  };
  Eigen::VectorXcd prev;
  for (int pts = 64; pts <= 1024; pts = pts * 3 / 2) {
    const auto r = quad::gauss_hermite_scaled(pts);
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(n_max + 1);
    for (size_t i = 0; i < r.x.size(); ++i) {
      const auto psi = quad::hermite_functions(n_max, r.x[i]);
      const cplx fi = r.w[i] * f(b.w1 * r.x[i]);
      for (int n = 0; n <= n_max; ++n) c(n) += psi[n] * fi;
    }
    if (prev.size() && (c - prev).cwiseAbs().maxCoeff() < 1e-13 * c.cwiseAbs().maxCoeff()) return c;
    prev = c;
  }
  throw ConvergenceError("input beam projection did not converge", 0.0);
}

}  // namespace

ModeVector input_vector(const ModeBasis& basis, const InputBeam& beam) {
  if (!(beam.w1 > 0.0) || !(beam.k > 0.0)) throw ConfigError("input beam needs w1 > 0 and k > 0");
  const int n = basis.n_max();
  const Eigen::VectorXcd cy = axis_projection(n, beam.theta_y, beam.eps_y, beam.Q_y, beam);
  const Eigen::VectorXcd cz = axis_projection(n, beam.theta_z, beam.eps_z, beam.Q_z, beam);
  ModeVector v(basis.dim());
  for (int i = 0; i < basis.dim(); ++i) v(i) = cy(basis.mode(i).ly) * cz(basis.mode(i).lz);
  const double norm = v.norm();
  if (!(norm > 0.0)) throw SingularityError("input beam has no overlap with the basis", 0.0);
  v /= norm;
  if (std::abs(v(0)) > 0.0) v *= std::conj(v(0)) / std::abs(v(0));
  return v;
}

}  // namespace fpcav
