#include "fpcav/mechanics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fpcav/errors.hpp"

namespace fpcav {

void OscillatorMode::validate() const {
  if (!(mass > 0.0)) throw ConfigError("oscillator '" + label + "': mass must be positive");
  if (!(omega0 > 0.0)) throw ConfigError("oscillator '" + label + "': omega0 must be positive");
  if (!(gamma >= 0.0)) throw ConfigError("oscillator '" + label + "': gamma must be non-negative");
  if (mirror != 1 && mirror != 2) throw ConfigError("oscillator '" + label + "': mirror must be 1 or 2");
}

double lamb_dicke(const OscillatorMode& mode, double k) {
  return k * std::sqrt(phys::hbar / (2.0 * mode.mass * mode.omega0));
}

double coupling_constant(const OscillatorMode& mode, double k, double tau) {
  return 2.0 * std::sqrt(2.0) * lamb_dicke(mode, k) / tau;
}

double thermal_weight(const OscillatorMode& mode, double k) {
  return 2.0 * std::sqrt(mode.gamma) / lamb_dicke(mode, k);
}

cplx susceptibility(const OscillatorMode& mode, double k, cplx omega, MechQuadrature quad) {
  const double eta = lamb_dicke(mode, k);
  const double w0 = mode.omega0;
  const cplx chi = w0 * eta * eta / (w0 * w0 - omega * omega - I * omega * mode.gamma);
  return quad == MechQuadrature::X ? chi : I * (omega / w0) * chi;
}

cplx dof_susceptibility(const std::vector<OscillatorMode>& modes, int mirror, int mu, int nu,
                        double k, cplx omega, MechQuadrature quad) {
  cplx acc = 0.0;
  for (const auto& m : modes) {
    if (m.mirror != mirror || m.K[mu] == 0.0 || m.K[nu] == 0.0) continue;
    acc += m.K[mu] * m.K[nu] * susceptibility(m, k, omega, quad);
  }
  return acc;
}

ServoTF ServoTF::constant(cplx gain) {
  return {[gain](double) { return gain; }};
}

ServoTF ServoTF::table(std::vector<double> omega, std::vector<cplx> value) {
  if (omega.empty() || omega.size() != value.size())
    throw ConfigError("servo table needs matching, non-empty frequency and value columns");
  std::vector<size_t> idx(omega.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return omega[a] < omega[b]; });
  std::vector<double> w;
  std::vector<cplx> h;
  for (size_t i : idx) {
    w.push_back(omega[i]);
    h.push_back(value[i]);
  }
  return {[w, h](double x) {
    if (x <= w.front()) return h.front();
    if (x >= w.back()) return h.back();
    const size_t j = size_t(std::upper_bound(w.begin(), w.end(), x) - w.begin());
    const double t = (x - w[j - 1]) / (w[j] - w[j - 1]);
    return (1.0 - t) * h[j - 1] + t * h[j];
  }};
}

double radiation_prefactor(const CavityConfig& cfg, int mirror, bool mirror_mode) {
  return mirror_mode ? 8.0 : 8.0 * mirror_R(cfg, mirror);
}

std::vector<Coordinate> langevin_coordinates(const Cavity& cav, const MechanicsModel& model,
                                             const LangevinOptions& opt) {
  std::vector<Coordinate> out;
  const auto& q = cav.quadratures();
  const auto& cfg = cav.config();
  const int d = cav.basis().dim();
  if (!opt.freeze_suspensions) {
    for (int J = 1; J <= 2; ++J) {
      const double s = parity(J);
      const double w = J == 1 ? cav.geometry().w1 : cav.geometry().w2;
      const double R = J == 1 ? cfg.R1 : cfg.R2;
      const double shift = std::isfinite(R) ? -s * w / (std::sqrt(2.0) * R) : 0.0;
      const double pre = radiation_prefactor(cfg, J, false);
      const std::string tag = std::to_string(J);
      out.push_back({"psi" + tag, J, kDofPsi, -1, ModeMatrix::Identity(d, d), true, pre});
      out.push_back({"psi_y" + tag, J, kDofY, -1, shift * q.Xy, false, pre});
      out.push_back({"psi_z" + tag, J, kDofZ, -1, shift * q.Xz, false, pre});
      out.push_back({"theta_y" + tag, J, kDofThetaY, -1, s * q.Xy, true, pre});
      out.push_back({"theta_z" + tag, J, kDofThetaZ, -1, s * q.Xz, true, pre});
    }
  }
  if (!opt.levin_mirrors) {
    for (size_t i = 0; i < model.mirror_modes.size(); ++i) {
      const auto& m = model.mirror_modes[i];
      if (m.profile.rows() != d) throw ConfigError("mirror mode '" + m.label + "': profile size mismatch");
      // amplitudes are round-trip phases like δψ, so the 2k carried by the profile is divided out
      out.push_back({"zeta_" + m.label, m.oscillator.mirror, -1, int(i),
                     m.profile / (2.0 * cav.geometry().k), true,
                     radiation_prefactor(cfg, m.oscillator.mirror, true)});
    }
  }
  return out;
}

namespace {

cplx delay(const Cavity& cav, int J, int Jp, cplx omega) {
  const double tau = cav.geometry().tau;
  return J == Jp ? std::exp(I * omega * tau) : std::exp(I * omega * tau / 2.0);
}

ModeVector mirror_vector(const Cavity& cav, const ModeVector& v1, int J) {
  return J == 1 ? v1 : cav.to_mirror2(v1);
}

ModeMatrix in_frame(const Cavity& cav, const ModeMatrix& op, int from, int to) {
  return from == to ? op : cav.to_frame(op, from, to);
}

cplx operator_stiffness(const Cavity& cav, const ModeVector& v1, int J, const ModeMatrix& left,
                        const ModeMatrix& gen, int gen_mirror, cplx omega) {
  const ModeVector vJ = mirror_vector(cav, v1, J);
  return stiffness_scalar(cav, omega, vJ, &left, in_frame(cav, gen, gen_mirror, J), vJ) *
         delay(cav, J, gen_mirror, omega);
}

// Σ_p J_p² 2ℜ‡{v†G_p† g Ĝ_p(ϖ) v}: force response to a relative amplitude fluctuation.
cplx intensity_response(const Cavity& cav, const ModeVector& vJ, const ModeMatrix& g, cplx omega) {
  auto raw = [&](cplx w) {
    cplx acc = 0.0;
    for (const auto& [p, J] : cav.harmonics()) {
      const ModeVector a = cav.green(p, 0.0).cwiseProduct(vJ);
      const ModeVector b = cav.green(p, w).cwiseProduct(vJ);
      acc += J * J * a.dot(g * b);
    }
    return acc;
  };
  return raw(omega) + std::conj(raw(-std::conj(omega)));
}

struct Blocks {
  Eigen::MatrixXcd chi;   // coordinate susceptibilities
  Eigen::MatrixXcd Kst;   // radiation stiffness between coordinates
  Eigen::VectorXd pre;    // radiation prefactors
};

Blocks build_blocks(const Cavity& cav, const ModeVector& v1, const MechanicsModel& model,
                    const std::vector<Coordinate>& coords, MechQuadrature quad, cplx omega) {
  const int n = int(coords.size());
  const double k = cav.geometry().k;
  Blocks b{Eigen::MatrixXcd::Zero(n, n), Eigen::MatrixXcd::Zero(n, n), Eigen::VectorXd::Zero(n)};
  for (int i = 0; i < n; ++i) {
    const auto& ci = coords[i];
    b.pre(i) = ci.prefactor;
    for (int j = 0; j < n; ++j) {
      const auto& cj = coords[j];
      if (ci.dof >= 0 && cj.dof >= 0 && ci.mirror == cj.mirror)
        b.chi(i, j) = dof_susceptibility(model.suspension, ci.mirror, ci.dof, cj.dof, k, omega, quad);
      if (i == j && ci.mirror_mode >= 0)
        b.chi(i, i) = susceptibility(model.mirror_modes[ci.mirror_mode].oscillator, k, omega, quad);
      if (ci.radiation) b.Kst(i, j) = coordinate_stiffness(cav, v1, ci, cj, omega);
    }
  }
  return b;
}

SourceInfo make_source(SourceKind kind, std::string name, int mirror, int oscillator = -1,
                       bool mirror_mode = false) {
  SourceInfo s;
  s.kind = kind;
  s.name = std::move(name);
  s.mirror = mirror;
  s.oscillator = oscillator;
  s.mirror_mode = mirror_mode;
  return s;
}

int find_coord(const std::vector<Coordinate>& coords, int mirror, int dof) {
  for (size_t i = 0; i < coords.size(); ++i)
    if (coords[i].mirror == mirror && coords[i].dof == dof) return int(i);
  return -1;
}

}  // namespace

cplx coordinate_stiffness(const Cavity& cav, const ModeVector& v1, const Coordinate& c,
                          const Coordinate& cp, cplx omega) {
  if (!c.radiation) return 0.0;
  return operator_stiffness(cav, v1, c.mirror, c.generator, cp.generator, cp.mirror, omega);
}

LangevinSystem assemble_langevin(const Cavity& cav, const ModeVector& v1,
                                 const MechanicsModel& model, const LangevinOptions& opt,
                                 cplx omega) {
  for (const auto& m : model.suspension) m.validate();
  for (const auto& m : model.mirror_modes) m.oscillator.validate();

  LangevinSystem sys;
  sys.omega = omega;
  sys.quad = opt.quad;
  sys.coords = langevin_coordinates(cav, model, opt);
  const auto& coords = sys.coords;
  const int n = int(coords.size());
  const double k = cav.geometry().k;
  const double E = cav.geometry().calE;
  const double sigma = opt.radiation_sign;

  const Blocks blk = build_blocks(cav, v1, model, coords, opt.quad, omega);
  // response of every coordinate to a unit generalized force on coordinate c
  const Eigen::MatrixXcd drive = sigma * blk.chi * blk.pre.asDiagonal();

  sys.A = Eigen::MatrixXcd::Identity(n, n) - E * E * drive * blk.Kst;

  // demodulated-signal coefficients with respect to each coordinate
  const std::array<const ModeMatrix*, 3> det{nullptr, &quadrant_detector(cav, Axis::y),
                                             &quadrant_detector(cav, Axis::z)};
  Eigen::MatrixXcd S(3, n);
  for (int s = 0; s < 3; ++s)
    for (int j = 0; j < n; ++j)
      S(s, j) = demod_coefficient(cav, v1, omega, det[s], in_frame(cav, coords[j].generator, coords[j].mirror, 1)) *
                delay(cav, 1, coords[j].mirror, omega);

  const int row_psi = find_coord(coords, 1, kDofPsi);
  const std::array<int, 3> fb_row{row_psi, find_coord(coords, 1, kDofThetaY),
                                  find_coord(coords, 1, kDofThetaZ)};
  const std::array<cplx, 3> H{model.servos.dp(omega), model.servos.qd[0](omega), model.servos.qd[1](omega)};
  for (int s = 0; s < 3; ++s)
    if (fb_row[s] >= 0 && H[s] != 0.0) sys.A.row(fb_row[s]) -= H[s] * E * E * S.row(s);

  // sources
  std::vector<Eigen::VectorXcd> cols;
  auto add_source = [&](SourceInfo info) {
    sys.sources.push_back(std::move(info));
    cols.push_back(Eigen::VectorXcd::Zero(n));
    return int(cols.size()) - 1;
  };
  if (!opt.freeze_suspensions) {
    for (size_t l = 0; l < model.suspension.size(); ++l) {
      const auto& m = model.suspension[l];
      SourceInfo info = make_source(SourceKind::thermal, "thermal:" + m.label + std::to_string(m.mirror), m.mirror, int(l));
      const int col = add_source(info);
      const cplx a = thermal_weight(m, k) * susceptibility(m, k, omega, opt.quad);
      for (int i = 0; i < n; ++i)
        if (coords[i].dof >= 0 && coords[i].mirror == m.mirror) cols[col](i) = m.K[coords[i].dof] * a;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (coords[i].mirror_mode < 0) continue;
    const auto& m = model.mirror_modes[coords[i].mirror_mode].oscillator;
    SourceInfo info = make_source(SourceKind::thermal, "thermal:" + coords[i].name, m.mirror, coords[i].mirror_mode, true);
    const int col = add_source(info);
    cols[col](i) = thermal_weight(m, k) * susceptibility(m, k, omega, opt.quad);
  }
  // shot-noise generalized forces
  std::vector<int> shot_col(n, -1);
  for (int j = 0; j < n; ++j) {
    if (!coords[j].radiation) continue;
    SourceInfo info = make_source(SourceKind::shot_force, "shot:" + coords[j].name, coords[j].mirror);
    info.generator = coords[j].generator;
    shot_col[j] = add_source(info);
  }
  for (int j = 0; j < n; ++j) {
    if (shot_col[j] < 0) continue;
    int col = shot_col[j];
    if (opt.axial_theta_shot_pairing && coords[j].dof == kDofPsi) {
      const int tz = find_coord(coords, coords[j].mirror, kDofThetaZ);
      if (tz >= 0) col = shot_col[tz];
    }
    cols[col] += E * drive.col(j);
  }
  std::array<int, 3> sig_col{};
  {
    SourceInfo dp = make_source(SourceKind::shot_dp, "shot:dp", 1);
    sig_col[0] = add_source(dp);
    SourceInfo qy = make_source(SourceKind::shot_qd, "shot:qd_y", 1);
    qy.axis = Axis::y;
    sig_col[1] = add_source(qy);
    SourceInfo qz = make_source(SourceKind::shot_qd, "shot:qd_z", 1);
    qz.axis = Axis::z;
    sig_col[2] = add_source(qz);
    for (int s = 0; s < 3; ++s)
      if (fb_row[s] >= 0) cols[sig_col[s]](fb_row[s]) += H[s] * E;
  }
  // relative intensity fluctuation
  Eigen::Vector3cd s_mu;
  s_mu(0) = dp_coefficients(cav, v1, omega).s_mu;
  s_mu(1) = qd_coefficients(cav, v1, omega, Axis::y).s_mu;
  s_mu(2) = qd_coefficients(cav, v1, omega, Axis::z).s_mu;
  const int rin = add_source(make_source(SourceKind::rin, "rin", 1));
  for (int j = 0; j < n; ++j)
    if (coords[j].radiation)
      cols[rin] += E * E * drive.col(j) *
                   intensity_response(cav, mirror_vector(cav, v1, coords[j].mirror), coords[j].generator, omega);
  for (int s = 0; s < 3; ++s)
    if (fb_row[s] >= 0) cols[rin](fb_row[s]) += H[s] * E * E * s_mu(s);
  // Levin mirror sources
  std::array<int, 2> levin_col{-1, -1};
  Eigen::MatrixXcd S_levin = Eigen::MatrixXcd::Zero(3, 2);
  if (opt.levin_mirrors) {
    for (int J = 1; J <= 2; ++J) {
      if (!model.levin[J - 1]) continue;
      const ModeMatrix& prof = *model.levin[J - 1];
      SourceInfo info = make_source(SourceKind::levin, "levin" + std::to_string(J), J);
      info.generator = prof;
      const int col = add_source(info);
      levin_col[J - 1] = col;
      for (int j = 0; j < n; ++j)
        if (coords[j].radiation)
          cols[col] += E * E * drive.col(j) *
                       operator_stiffness(cav, v1, coords[j].mirror, coords[j].generator, prof, J, omega);
      for (int s = 0; s < 3; ++s) {
        S_levin(s, J - 1) = demod_coefficient(cav, v1, omega, det[s], in_frame(cav, prof, J, 1)) *
                            delay(cav, 1, J, omega);
        if (fb_row[s] >= 0) cols[col](fb_row[s]) += H[s] * E * E * S_levin(s, J - 1);
      }
    }
  }

  const int m = int(cols.size());
  sys.B.resize(n, m);
  for (int c = 0; c < m; ++c) sys.B.col(c) = cols[c];

  // observables: the coordinates, then the three demodulated signals
  const int no = n + 3;
  sys.obs_x = Eigen::MatrixXcd::Zero(no, n);
  sys.obs_n = Eigen::MatrixXcd::Zero(no, m);
  for (int i = 0; i < n; ++i) {
    sys.observables.push_back(coords[i].name);
    sys.obs_x(i, i) = 1.0;
  }
  const std::array<const char*, 3> sig_names{"dp_signal", "qd_y_signal", "qd_z_signal"};
  for (int s = 0; s < 3; ++s) {
    sys.observables.push_back(sig_names[s]);
    sys.obs_x.row(n + s) = E * E * S.row(s);
    sys.obs_n(n + s, sig_col[s]) = E;
    sys.obs_n(n + s, rin) = E * E * s_mu(s);
    for (int J = 0; J < 2; ++J)
      if (levin_col[J] >= 0) sys.obs_n(n + s, levin_col[J]) = E * E * S_levin(s, J);
  }
  return sys;
}

TransferResult solve_transfer(const LangevinSystem& sys, int source) {
  if (source < 0 || source >= sys.B.cols()) throw ConfigError("source index out of range");
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(sys.A);
  const double rc = lu.rcond();
  if (!(rc > 0.0) || !std::isfinite(rc))
    throw SingularityError("Langevin system is singular at this frequency", 0.0);
  TransferResult r;
  const Eigen::VectorXcd b = sys.B.col(source);
  r.x = lu.solve(b);
  const double nb = b.norm();
  r.residual = nb > 0.0 ? (sys.A * r.x - b).norm() / nb : 0.0;
  r.condition = 1.0 / rc;
  r.ill_conditioned = r.condition > 1e12;
  return r;
}

Eigen::MatrixXcd solve_all(const LangevinSystem& sys) {
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(sys.A);
  const double rc = lu.rcond();
  if (!(rc > 0.0) || !std::isfinite(rc))
    throw SingularityError("Langevin system is singular at this frequency", 0.0);
  return lu.solve(sys.B);
}

Eigen::MatrixXcd modal_matrix(const Cavity& cav, const ModeVector& v1, const MechanicsModel& model,
                              const LangevinOptions& opt, cplx omega) {
  const auto coords = langevin_coordinates(cav, model, opt);
  const int n = int(coords.size());
  const double k = cav.geometry().k;
  const double E = cav.geometry().calE;

  // oscillators and their coordinate couplings
  std::vector<const OscillatorMode*> osc;
  std::vector<Eigen::VectorXd> Kcol;
  if (!opt.freeze_suspensions)
    for (const auto& m : model.suspension) {
      Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < n; ++i)
        if (coords[i].dof >= 0 && coords[i].mirror == m.mirror) col(i) = m.K[coords[i].dof];
      osc.push_back(&m);
      Kcol.push_back(col);
    }
  for (int i = 0; i < n; ++i)
    if (coords[i].mirror_mode >= 0) {
      Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
      col(i) = 1.0;
      osc.push_back(&model.mirror_modes[coords[i].mirror_mode].oscillator);
      Kcol.push_back(col);
    }
  const int no = int(osc.size());
  Eigen::MatrixXcd Kmod(n, no);
  Eigen::VectorXcd D(no), c(no);
  for (int l = 0; l < no; ++l) {
    Kmod.col(l) = Kcol[l].cast<cplx>();
    const auto& m = *osc[l];
    D(l) = m.omega0 * m.omega0 - omega * omega - I * omega * m.gamma;
    const double eta = lamb_dicke(m, k);
    c(l) = m.omega0 * eta * eta;
  }
  Eigen::MatrixXcd Kst = Eigen::MatrixXcd::Zero(n, n);
  Eigen::VectorXd pre(n);
  for (int i = 0; i < n; ++i) {
    pre(i) = coords[i].prefactor;
    if (!coords[i].radiation) continue;
    for (int j = 0; j < n; ++j) Kst(i, j) = coordinate_stiffness(cav, v1, coords[i], coords[j], omega);
  }
  Eigen::MatrixXcd M = D.asDiagonal();
  M -= opt.radiation_sign * E * E * c.asDiagonal() * Kmod.transpose() * pre.asDiagonal() * Kst * Kmod;
  return M;
}

std::vector<SearchWindow> default_windows(const MechanicsModel& model, const LangevinOptions& opt) {
  std::vector<SearchWindow> out;
  auto add = [&](const OscillatorMode& m) {
    const double W = std::max(10.0 * m.gamma, m.omega0 / 5.0);
    out.push_back({cplx(m.omega0 - W, -W), cplx(m.omega0 + W, W)});
  };
  if (!opt.freeze_suspensions)
    for (const auto& m : model.suspension) add(m);
  if (!opt.levin_mirrors)
    for (const auto& m : model.mirror_modes) add(m.oscillator);
  return out;
}

namespace {

struct DetFn {
  const Cavity& cav;
  const ModeVector& v1;
  const MechanicsModel& model;
  const LangevinOptions& opt;
  double scale;  // normalizes det M to O(1)
  cplx operator()(cplx w) const {
    return modal_matrix(cav, v1, model, opt, w).determinant() / scale;
  }
};

// Winding number of f along the rectangle boundary, refining segments until the phase step is small.
int winding(const DetFn& f, cplx lo, cplx hi) {
  const std::array<cplx, 5> corner{lo, cplx(hi.real(), lo.imag()), hi, cplx(lo.real(), hi.imag()), lo};
  double total = 0.0;
  for (int e = 0; e < 4; ++e) {
    std::vector<std::pair<cplx, cplx>> stack;
    const int base = 16;
    cplx prev_z = corner[e];
    cplx prev_f = f(prev_z);
    for (int s = 1; s <= base; ++s) {
      const cplx z = corner[e] + (corner[e + 1] - corner[e]) * (double(s) / base);
      cplx a = prev_z, fa = prev_f;
      const cplx fz = f(z);
      // recursive bisection of [a, z] while the phase jump is large
      std::vector<std::tuple<cplx, cplx, cplx, cplx, int>> work{{a, fa, z, fz, 0}};
      while (!work.empty()) {
        auto [za, fa_, zb, fb, depth] = work.back();
        work.pop_back();
        const double dphi = std::arg(fb / fa_);
        if (std::abs(dphi) > 0.5 && depth < 30) {
          const cplx zm = 0.5 * (za + zb);
          const cplx fm = f(zm);
          work.push_back({zm, fm, zb, fb, depth + 1});
          work.push_back({za, fa_, zm, fm, depth + 1});
        } else {
          total += dphi;
        }
      }
      prev_z = z;
      prev_f = fz;
    }
  }
  return int(std::lround(total / (2.0 * phys::pi)));
}

bool newton(const DetFn& f, cplx& z, cplx lo, cplx hi) {
  const double span = std::abs(hi - lo);
  for (int it = 0; it < 100; ++it) {
    const double h = 1e-7 * std::max(std::abs(z), span);
    const cplx df = (f(z + h) - f(z - h)) / (2.0 * h);
    const cplx fz = f(z);
    if (df == 0.0) return false;
    const cplx step = fz / df;
    z -= step;
    if (std::abs(step) < 1e-13 * std::max(std::abs(z), 1.0)) break;
  }
  const double m = 1e-6 * span;
  return z.real() >= lo.real() - m && z.real() <= hi.real() + m && z.imag() >= lo.imag() - m &&
         z.imag() <= hi.imag() + m;
}

void search(const DetFn& f, cplx lo, cplx hi, int depth, int window, std::vector<FreeOscillation>& out) {
  const int n = winding(f, lo, hi);
  if (n <= 0) return;
  if (n == 1 || depth >= 10) {
    cplx z = 0.5 * (lo + hi);
    FreeOscillation r;
    r.converged = newton(f, z, lo, hi);
    r.omega = z;
    r.stable = z.imag() < 0.0;
    r.window = window;
    out.push_back(r);
    if (n == 1 || !r.converged) return;
  }
  const cplx mid = 0.5 * (lo + hi);
  // slightly off-centre split avoids landing on a root
  const cplx cut = mid + 1e-3 * (hi - lo) * cplx(0.37, 0.29);
  search(f, lo, cut, depth + 1, window, out);
  search(f, cplx(cut.real(), lo.imag()), cplx(hi.real(), cut.imag()), depth + 1, window, out);
  search(f, cplx(lo.real(), cut.imag()), cplx(cut.real(), hi.imag()), depth + 1, window, out);
  search(f, cut, hi, depth + 1, window, out);
}

}  // namespace

std::vector<FreeOscillation> free_oscillations(const Cavity& cav, const ModeVector& v1,
                                               const MechanicsModel& model,
                                               const LangevinOptions& opt,
                                               const std::vector<SearchWindow>& windows) {
  LangevinOptions o = opt;
  o.quad = MechQuadrature::X;
  MechanicsModel quiet = model;
  quiet.servos = Servos{};
  double scale = 1.0;
  if (!o.freeze_suspensions)
    for (const auto& m : model.suspension) scale *= m.omega0 * m.omega0;
  if (!o.levin_mirrors)
    for (const auto& m : model.mirror_modes) scale *= m.oscillator.omega0 * m.oscillator.omega0;
  const DetFn f{cav, v1, quiet, o, scale};

  std::vector<FreeOscillation> roots;
  for (size_t w = 0; w < windows.size(); ++w) {
    std::vector<FreeOscillation> found;
    try {
      search(f, windows[w].lo, windows[w].hi, 0, int(w), found);
    } catch (const SingularityError&) {
      FreeOscillation r;
      r.window = int(w);
      r.converged = false;
      found.push_back(r);
    }
    for (auto& r : found) {
      if (r.converged) {
        const Eigen::MatrixXcd M = modal_matrix(cav, v1, quiet, o, r.omega);
        const double nrm = M.norm();
        r.det_residual = std::abs(M.determinant()) / std::pow(std::max(nrm, 1e-300), double(M.rows()));
      }
      const bool dup = std::any_of(roots.begin(), roots.end(), [&](const FreeOscillation& q) {
        return q.converged && r.converged && std::abs(q.omega - r.omega) < 1e-9 * std::abs(r.omega);
      });
      if (!dup) roots.push_back(r);
    }
  }
  std::sort(roots.begin(), roots.end(),
            [](const FreeOscillation& a, const FreeOscillation& b) { return a.omega.real() < b.omega.real(); });
  return roots;
}

}  // namespace fpcav
