#include "fpcav/forces.hpp"

#include <cmath>

namespace fpcav {

std::array<ModeMatrix, kGenCount> generator_set(const Cavity& cav) {
  const auto& q = cav.quadratures();
  const int d = cav.basis().dim();
  return {ModeMatrix::Identity(d, d), q.Xy, q.Xz, q.Yy, q.Yz};
}

double mirror_R(const CavityConfig& cfg, int J) {
  return J == 1 ? cfg.r1 * cfg.r1 + cfg.A1 / 2.0 : cfg.r2 * cfg.r2 + cfg.A2 / 2.0;
}

StaticForces static_force_matrices(const Cavity& cav) {
  const int d = cav.basis().dim();
  StaticForces s{ModeMatrix::Zero(d, d), ModeMatrix::Zero(d, d), ModeMatrix::Zero(d, d)};
  for (const auto& [p, J] : cav.harmonics()) {
    const ModeDiagonal g = cav.green(p, 0.0);
    const ModeMatrix gd = g.asDiagonal();
    s.F0 += J * J * gd.adjoint() * gd;
    s.T0y += J * J * gd.adjoint() * cav.quadratures().Xy * gd;
    s.T0z += J * J * gd.adjoint() * cav.quadratures().Xz * gd;
  }
  return s;
}

namespace {

ModeMatrix raw_operator(const Cavity& cav, cplx omega, const ModeMatrix* left, const ModeMatrix& gen) {
  const int d = cav.basis().dim();
  ModeMatrix acc = ModeMatrix::Zero(d, d);
  for (const auto& [p, J] : cav.harmonics()) {
    const ModeDiagonal g = cav.green(p, 0.0);
    const ModeDiagonal hp = cav.green(p, omega).cwiseProduct(cav.phi());
    ModeMatrix mid = hp.asDiagonal() * gen * g.asDiagonal();
    if (left) mid = (*left) * mid;
    acc += (2.0 * J * J) * cav.loop(p) * (g.conjugate().asDiagonal() * mid);
  }
  return acc;
}

cplx raw_scalar(const Cavity& cav, cplx omega, const ModeVector& a, const ModeMatrix* left,
                const ModeMatrix& gen, const ModeVector& b) {
  cplx acc = 0.0;
  for (const auto& [p, J] : cav.harmonics()) {
    const ModeDiagonal g = cav.green(p, 0.0);
    const ModeDiagonal hp = cav.green(p, omega).cwiseProduct(cav.phi());
    ModeVector y = hp.cwiseProduct(gen * g.cwiseProduct(b));
    if (left) y = (*left) * y;
    acc += (2.0 * J * J) * cav.loop(p) * g.cwiseProduct(a).dot(y);
  }
  return acc;
}

}  // namespace

ModeMatrix stiffness_operator(const Cavity& cav, cplx omega, const ModeMatrix* left,
                              const ModeMatrix& gen) {
  return im_dagger([&](cplx w) { return raw_operator(cav, w, left, gen); }, omega);
}

cplx stiffness_scalar(const Cavity& cav, cplx omega, const ModeVector& a, const ModeMatrix* left,
                      const ModeMatrix& gen, const ModeVector& b) {
  const cplx s = raw_scalar(cav, omega, a, left, gen, b);
  const cplx t = raw_scalar(cav, -std::conj(omega), b, left, gen, a);
  return (s - std::conj(t)) / (2.0 * I);
}

StiffnessMatrices stiffness_matrices(const Cavity& cav, cplx omega) {
  StiffnessMatrices m;
  m.omega = omega;
  const auto gens = generator_set(cav);
  const auto& q = cav.quadratures();
  for (int i = 0; i < kGenCount; ++i) {
    m.F[i] = stiffness_operator(cav, omega, nullptr, gens[i]);
    m.Ty[i] = stiffness_operator(cav, omega, &q.Xy, gens[i]);
    m.Tz[i] = stiffness_operator(cav, omega, &q.Xz, gens[i]);
  }
  return m;
}

StiffnessSet contract(const StiffnessMatrices& m, const ModeVector& v1, const ModeVector& v2) {
  StiffnessSet s;
  s.omega = m.omega;
  const ModeVector* v[2] = {&v1, &v2};
  for (int J = 0; J < 2; ++J)
    for (int i = 0; i < kGenCount; ++i) {
      s.F[J][i] = v[J]->dot(m.F[i] * *v[J]);
      s.T[J][0][i] = v[J]->dot(m.Ty[i] * *v[J]);
      s.T[J][1][i] = v[J]->dot(m.Tz[i] * *v[J]);
    }
  return s;
}

StiffnessSet stiffness(const Cavity& cav, const ModeVector& v1, cplx omega) {
  StiffnessSet s;
  s.omega = omega;
  const auto gens = generator_set(cav);
  const auto& q = cav.quadratures();
  const ModeVector v2 = cav.to_mirror2(v1);
  const ModeVector* v[2] = {&v1, &v2};
  for (int J = 0; J < 2; ++J)
    for (int i = 0; i < kGenCount; ++i) {
      s.F[J][i] = stiffness_scalar(cav, omega, *v[J], nullptr, gens[i], *v[J]);
      s.T[J][0][i] = stiffness_scalar(cav, omega, *v[J], &q.Xy, gens[i], *v[J]);
      s.T[J][1][i] = stiffness_scalar(cav, omega, *v[J], &q.Xz, gens[i], *v[J]);
    }
  return s;
}

Eigen::MatrixXcd deformation_forces(const Cavity& cav, const ModeVector& v1,
                                    const std::vector<MirrorProfile>& profiles, cplx omega) {
  const int n = static_cast<int>(profiles.size());
  Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(n, n);
  const ModeVector v2 = cav.to_mirror2(v1);
  for (int a = 0; a < n; ++a) {
    const int J = profiles[a].mirror;
    const ModeVector& v = J == 1 ? v1 : v2;
    const ModeMatrix& left = profiles[a].sigma;
    for (int b = 0; b < n; ++b) {
      const ModeMatrix gen = cav.to_frame(profiles[b].sigma, profiles[b].mirror, J);
      F(a, b) = stiffness_scalar(cav, omega, v, &left, gen, v);
    }
  }
  return F;
}

ShotProjector shot_force_projector(const Cavity& cav, const ModeVector& vJ, const ModeMatrix* gen) {
  ShotProjector sp;
  const double t1 = cav.config().t1;
  for (const auto& [p, J] : cav.harmonics()) {
    const ModeVector gv = cav.green(p, 0.0).cwiseProduct(vJ);
    Eigen::RowVectorXcd r = gv.adjoint();
    if (gen) r = r * (*gen);
    sp.rows[p] = (2.0 * J / t1) * r;
  }
  return sp;
}

StiffnessSet small_misalignment_stiffness(const Cavity& cav, cplx v1y, cplx v1z, cplx omega) {
  const int i10 = cav.basis().index(1, 0);
  const double phiG = cav.geometry().phi_G;
  // Accumulates Σ 2J² e^{-iψ}R_p (·) over harmonics for the entries of the reduced model.
  struct Entries {
    cplx zero_psi, zero_tx;       // |g0|² h0 φ0, |g0|² h1 φ1
    cplx fx_0q, fx_q0;            // g0* h0 φ0 g1, g1* h1 φ1 g0
    cplx tpsi_0q, tpsi_q0;        // g0* h1 φ1 g1, g1* h0 φ0 g0
  };
  auto entries = [&](cplx w) {
    Entries e{};
    if (i10 < 0) {
      for (const auto& [p, J] : cav.harmonics()) {
        const cplx g0 = cav.green(p, 0.0)(0), h0 = cav.green(p, w)(0);
        e.zero_psi += 2.0 * J * J * cav.loop(p) * std::norm(g0) * h0 * cav.phi()(0);
      }
      return e;
    }
    for (const auto& [p, J] : cav.harmonics()) {
      const ModeDiagonal g = cav.green(p, 0.0), h = cav.green(p, w);
      const cplx g0 = g(0), g1 = g(i10), h0 = h(0), h1 = h(i10);
      const cplx f0 = cav.phi()(0), f1 = cav.phi()(i10);
      const cplx c = 2.0 * J * J * cav.loop(p);
      e.zero_psi += c * std::norm(g0) * h0 * f0;
      e.zero_tx += c * std::norm(g0) * h1 * f1;
      e.fx_0q += c * std::conj(g0) * h0 * f0 * g1;
      e.fx_q0 += c * std::conj(g1) * h1 * f1 * g0;
      e.tpsi_0q += c * std::conj(g0) * h1 * f1 * g1;
      e.tpsi_q0 += c * std::conj(g1) * h0 * f0 * g0;
    }
    return e;
  };
  const Entries ep = entries(omega), em = entries(-std::conj(omega));
  // ℑ‡ of (A δv + B δv*) with A, B the (0,q) and (q,0) entries.
  auto imd = [](cplx a, cplx am) { return (a - std::conj(am)) / (2.0 * I); };
  auto first = [&](cplx A, cplx Am, cplx B, cplx Bm, cplx dv) {
    return imd(A * dv + B * std::conj(dv), Am * dv + Bm * std::conj(dv));
  };
  StiffnessSet s;
  s.omega = omega;
  for (int J = 0; J < 2; ++J) {
    // mirror 2 sees Φ^{1/2} v; after removing the common phase δv rotates by e^{-iφ_G}
    const cplx rot = J == 0 ? cplx(1.0) : std::exp(-I * phiG);
    const cplx dv[2] = {v1y * rot, v1z * rot};
    s.F[J][kPsi] = imd(ep.zero_psi, em.zero_psi);
    for (int q = 0; q < 2; ++q) {
      // X_q: (0,q) entry 1, (q,0) entry 1; Y_q: i and -i.
      s.F[J][kXy + q] = first(ep.fx_0q, em.fx_0q, ep.fx_q0, em.fx_q0, dv[q]);
      s.F[J][kYy + q] = first(I * ep.fx_0q, I * em.fx_0q, -I * ep.fx_q0, -I * em.fx_q0, dv[q]);
      s.T[J][q][kPsi] = first(ep.tpsi_0q, em.tpsi_0q, ep.tpsi_q0, em.tpsi_q0, dv[q]);
      s.T[J][q][kXy + q] = imd(ep.zero_tx, em.zero_tx);
      s.T[J][q][kYy + q] = imd(-I * ep.zero_tx, -I * em.zero_tx);
    }
  }
  return s;
}

double force_scale(const Cavity& cav, int J) {
  const auto& g = cav.geometry();
  return g.calE * g.calE * 2.0 * mirror_R(cav.config(), J) * phys::hbar * g.k;
}

}  // namespace fpcav
