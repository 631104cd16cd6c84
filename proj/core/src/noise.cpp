#include "fpcav/noise.hpp"

#include <cmath>
#include <mutex>

#include "fpcav/errors.hpp"

namespace fpcav {

ThermalModelKind parse_thermal_model(const std::string& name) {
  if (name == "brownian") return ThermalModelKind::brownian;
  if (name == "diosi") return ThermalModelKind::diosi;
  if (name == "gv") return ThermalModelKind::gv;
  throw ConfigError("thermal model must be brownian, diosi or gv, got '" + name + "'");
}

const char* to_string(ThermalModelKind kind) {
  switch (kind) {
    case ThermalModelKind::brownian: return "brownian";
    case ThermalModelKind::diosi: return "diosi";
    case ThermalModelKind::gv: return "gv";
  }
  return "?";
}

const char* to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::thermal: return "thermal";
    case SourceKind::shot_force:
    case SourceKind::shot_dp:
    case SourceKind::shot_qd: return "shot";
    case SourceKind::rin: return "rin";
    case SourceKind::levin: return "levin";
  }
  return "?";
}

void ThermalModel::validate() const {
  if (!(temperature > 0.0)) throw ConfigError("thermal.temperature must be positive");
}

ThermalCorrelation thermal_correlations(const OscillatorMode& mode, const ThermalModel& model,
                                        double omega) {
  model.validate();
  const double wJ = mode.omega0, g = mode.gamma, kT = phys::kB * model.temperature;
  const double a = 4.0 * kT / (phys::hbar * wJ);
  const double odd = 2.0 * omega / wJ;  // antisymmetric part common to every model
  ThermalCorrelation c;
  c.commutator = 2.0 * odd;
  switch (model.kind) {
    case ThermalModelKind::brownian:
      c.XX_sym = c.YY_sym = a;
      c.XY_sym = a;
      c.XX = c.YY = c.XY = c.YX = a + odd;
      break;
    case ThermalModelKind::diosi: {
      if (omega == 0.0) throw SingularityError("Diosi correlations diverge at zero frequency", 0.0);
      const double eta = model.include_eta ? phys::hbar * wJ / (3.0 * kT) : 0.0;
      c.XX_sym = a + (omega * omega + g * g) / (wJ * wJ) * eta;
      c.YY_sym = a + (wJ * wJ) / (omega * omega) * eta;
      c.XX = c.XX_sym + odd;
      c.YY = c.YY_sym + odd;
      const cplx wg(omega, g);
      c.XY = a + wg / omega * eta + wJ / omega + wg / wJ;
      c.YX = std::conj(c.XY);
      c.XY_sym = a + eta + I * g / wJ;
      break;
    }
    case ThermalModelKind::gv: {
      if (omega == 0.0) throw SingularityError("GV correlations diverge at zero frequency", 0.0);
      const double sym = 2.0 * omega / wJ / std::tanh(phys::hbar * omega / (2.0 * kT));
      c.XX_sym = c.YY_sym = sym;
      c.XY_sym = sym;
      c.XX = c.YY = c.XY = c.YX = sym + odd;
      break;
    }
  }
  return c;
}

void MirrorMaterial::validate() const {
  if (!(young > 0.0)) throw ConfigError("material.young must be positive");
  if (!(poisson > 0.0 && poisson < 0.5)) throw ConfigError("material.poisson must lie in (0, 0.5)");
  if (!(loss_angle > 0.0)) throw ConfigError("material.loss_angle must be positive");
}

double levin_cG(const MirrorMaterial& mat, double w) {
  mat.validate();
  return (1.0 - mat.poisson * mat.poisson) / (std::sqrt(2.0 * phys::pi) * mat.young * w);
}

namespace {

double gaussian_load_profile(double rho) { return std::cyl_bessel_i(0.0, rho) * std::exp(-rho); }

double levin_f_raw(int alpha, int beta) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, double> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find({alpha, beta}); it != cache.end()) return it->second;
  const auto rule = quad::gauss_hermite_scaled(160);
  const int n = std::max(alpha, beta);
  std::vector<std::vector<double>> h;
  for (double x : rule.x) h.push_back(quad::hermite_functions(n, x));
  double acc = 0.0;
  for (size_t i = 0; i < rule.x.size(); ++i)
    for (size_t j = 0; j < rule.x.size(); ++j) {
      const double x = rule.x[i], z = rule.x[j];
      const double rho = 0.5 * (x * x + z * z);
      acc += rule.w[i] * rule.w[j] * gaussian_load_profile(rho) * std::exp(-rho) * h[i][alpha] * h[j][beta];
    }
  cache[{alpha, beta}] = acc;
  return acc;
}

}  // namespace

double levin_f(int alpha, int beta) {
  if (alpha < 0 || beta < 0) throw ConfigError("expansion indices must be non-negative");
  if (alpha % 2 || beta % 2) return 0.0;
  return levin_f_raw(alpha, beta) / levin_f_raw(0, 0);
}

double illumination_factor(const Illumination& P) {
  auto it = P.find(ModeIndex{0, 0});
  if (it == P.end() || it->second == 0.0)
    throw ConfigError("illumination table needs a non-zero fundamental coefficient");
  const double p00 = it->second;
  double acc = 0.0;
  for (const auto& [a, pa] : P)
    for (const auto& [b, pb] : P) {
      if (!std::isfinite(pa) || !std::isfinite(pb)) throw ConfigError("illumination coefficients must be finite");
      const double sign = (b.ly + b.lz) % 2 ? -1.0 : 1.0;
      acc += sign * pa * pb / (p00 * p00) * levin_f(a.ly + b.ly, a.lz + b.lz);
    }
  return acc;
}

double levin_psd(const MirrorMaterial& mat, double w, double k, double temperature, double omega,
                 double fP) {
  if (!(omega > 0.0)) throw SingularityError("Levin noise diverges at zero frequency", 0.0);
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  const double cP = fP * levin_cG(mat, w);
  return 4.0 * phys::kB * temperature / (phys::hbar * omega) * 2.0 * phys::hbar * k * cP * mat.loss_angle;
}

ModeMatrix levin_profile(const ModeBasis& basis, double w, double k) {
  Surface s;
  s.f = [w](double y, double z) { return gaussian_load_profile((y * y + z * z) / (2.0 * w * w)); };
  ModeMatrix m = overlap_matrix(basis, s, w, k);
  return m * (2.0 * k / m(0, 0).real());
}

namespace {

struct PortFactors {
  double force[2];
  double out1, out2;  // reflected-port weights multiplying Ĝ^OUT and Ĝ
};

PortFactors port_factors(const CavityConfig& c, ShotNormalization norm) {
  // port-2 vacuum reaches the mirror-1 reference plane after one reflection off mirror 1
  if (norm == ShotNormalization::physical) return {{c.t1, c.r1 * c.t2}, c.t1, c.t2};
  return {{1.0, c.t2 / c.t1}, c.t1 * c.t1, c.t1 * c.t2};
}

// Φ^{1/2} e^{iϖτ/2} for mirror 2, identity for mirror 1.
ModeDiagonal mirror_phase(const Cavity& cav, int J, cplx omega) {
  const int d = cav.basis().dim();
  if (J == 1) return ModeDiagonal::Ones(d);
  return cav.phi_half() * std::exp(I * omega * cav.geometry().tau / 2.0);
}

std::vector<std::pair<int, double>> harmonic_list(const Cavity& cav) {
  return {cav.harmonics().begin(), cav.harmonics().end()};
}

}  // namespace

Eigen::VectorXcd shot_weights(const Cavity& cav, const ModeVector& v1, const SourceInfo& src,
                              cplx omega, ShotNormalization norm) {
  const auto& cfg = cav.config();
  const int d = cav.basis().dim();
  const auto harm = harmonic_list(cav);
  const int nh = int(harm.size());
  const PortFactors pf = port_factors(cfg, norm);
  Eigen::VectorXcd w = Eigen::VectorXcd::Zero(2 * nh * d);
  auto slot = [&](int port, int hi) { return w.segment((port * nh + hi) * d, d); };

  if (src.kind == SourceKind::shot_force) {
    const ModeVector vJ = src.mirror == 1 ? v1 : cav.to_mirror2(v1);
    const ModeDiagonal ph = mirror_phase(cav, src.mirror, omega);
    for (int hi = 0; hi < nh; ++hi) {
      const auto [p, J] = harm[hi];
      const ModeVector u = (src.generator * cav.green(p, 0.0).cwiseProduct(vJ)).conjugate();
      const ModeDiagonal base = 2.0 * J * u.cwiseProduct(ph).cwiseProduct(cav.green(p, omega));
      for (int port = 0; port < 2; ++port) slot(port, hi) = pf.force[port] * base;
    }
    return w;
  }
  if (src.kind != SourceKind::shot_dp && src.kind != SourceKind::shot_qd)
    throw ConfigError("shot weights requested for a non-shot source");

  const ModeMatrix* Q = src.kind == SourceKind::shot_qd ? &quadrant_detector(cav, src.axis) : nullptr;
  const int k = cfg.demod_k;
  const cplx ephi = std::exp(I * cfg.demod_phase);
  std::map<int, int> pos;
  std::map<int, ModeVector> xQ;  // (x_p† Q)ᵀ with x_p = G_p^OUT v
  for (int hi = 0; hi < nh; ++hi) {
    const int p = harm[hi].first;
    pos[p] = hi;
    const ModeVector x = cav.green_out(p, 0.0).cwiseProduct(v1);
    xQ[p] = (Q ? ModeVector(*Q * x) : x).conjugate();
  }
  auto add = [&](int h, cplx coef, const ModeVector& row) {
    const int hi = pos.at(h);
    slot(0, hi) += coef * pf.out1 * row.cwiseProduct(cav.green_out(h, omega));
    slot(1, hi) += coef * pf.out2 * row.cwiseProduct(cav.green(h, omega));
  };
  for (const auto& [p, Jp] : harm) {
    auto it = pos.find(p - k);
    if (it == pos.end()) continue;
    const double coef = 2.0 * cav.bessel(p - k) * Jp;
    add(p - k, coef * ephi, xQ[p]);
    add(p, -coef * std::conj(ephi), xQ[p - k]);
  }
  return -I * w;
}

ShotCorrelations shot_correlations(const Cavity& cav, const ModeVector& v1,
                                   const std::vector<SourceInfo>& sources, double omega,
                                   ShotNormalization norm) {
  const int n = int(sources.size());
  Eigen::MatrixXcd Wp, Wm;
  for (int a = 0; a < n; ++a) {
    const Eigen::VectorXcd p = shot_weights(cav, v1, sources[a], omega, norm);
    const Eigen::VectorXcd m = shot_weights(cav, v1, sources[a], -omega, norm);
    if (a == 0) {
      Wp.resize(n, p.size());
      Wm.resize(n, p.size());
    }
    Wp.row(a) = p.transpose();
    Wm.row(a) = m.transpose();
  }
  ShotCorrelations c;
  if (n == 0) return c;
  const Eigen::MatrixXcd direct = Wp * Wp.adjoint();
  const Eigen::MatrixXcd mirror = Wm.conjugate() * Wm.transpose();
  c.ordered = 0.25 * direct;
  c.symmetrized = 0.125 * (direct + mirror);
  c.commutator = 0.25 * (direct - mirror);
  return c;
}

Eigen::MatrixXcd shot_correlation_direct(const Cavity& cav, const ModeVector& v1,
                                         const std::vector<ForceChannel>& channels, double omega,
                                         ShotNormalization norm) {
  const auto& cfg = cav.config();
  const PortFactors pf = port_factors(cfg, norm);
  const double c = pf.force[0] * pf.force[0] + pf.force[1] * pf.force[1];
  const int n = int(channels.size());
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& [p, J] : cav.harmonics()) {
    const ModeDiagonal G = cav.green(p, 0.0);
    const ModeDiagonal Gh2 = cav.green(p, omega).cwiseAbs2().cast<cplx>();
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const auto& A = channels[a];
        const auto& B = channels[b];
        const ModeVector va = G.cwiseProduct(A.mirror == 1 ? v1 : cav.to_mirror2(v1));
        const ModeVector vb = G.cwiseProduct(B.mirror == 1 ? v1 : cav.to_mirror2(v1));
        const ModeDiagonal D = Gh2.cwiseProduct(mirror_phase(cav, A.mirror, omega))
                                   .cwiseProduct(mirror_phase(cav, B.mirror, omega).conjugate());
        C(a, b) += c * J * J * va.dot(A.generator * D.asDiagonal() * B.generator * vb);
      }
  }
  return C;
}

Eigen::MatrixXcd shot_correlation_projector(const Cavity& cav, const ModeVector& v1,
                                            const std::vector<ForceChannel>& channels, double omega,
                                            ShotNormalization norm) {
  const auto& cfg = cav.config();
  const PortFactors pf = port_factors(cfg, norm);
  const int n = int(channels.size());
  std::vector<ShotProjector> proj;
  for (const auto& ch : channels)
    proj.push_back(shot_force_projector(cav, ch.mirror == 1 ? v1 : cav.to_mirror2(v1), &ch.generator));
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& [p, J] : cav.harmonics()) {
    const ModeDiagonal Gh = cav.green(p, omega);
    std::vector<Eigen::RowVectorXcd> w;
    for (int a = 0; a < n; ++a) {
      const ModeDiagonal ph = mirror_phase(cav, channels[a].mirror, omega);
      w.push_back(cfg.t1 * proj[a].rows.at(p).cwiseProduct(ph.cwiseProduct(Gh).transpose()));
    }
    const double ports = pf.force[0] * pf.force[0] + pf.force[1] * pf.force[1];
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) C(a, b) += 0.25 * ports * w[b].dot(w[a]);
  }
  return C;
}

Eigen::MatrixXcd source_covariance(const Cavity& cav, const ModeVector& v1,
                                   const MechanicsModel& model, const LangevinSystem& sys,
                                   const NoiseOptions& opt) {
  const double omega = sys.omega.real();
  const int m = int(sys.sources.size());
  Eigen::MatrixXcd N = Eigen::MatrixXcd::Zero(m, m);
  std::vector<int> shot_idx;
  std::vector<SourceInfo> shot_src;
  const double k = cav.geometry().k;
  for (int i = 0; i < m; ++i) {
    const auto& s = sys.sources[i];
    switch (s.kind) {
      case SourceKind::thermal: {
        if (!opt.thermal_on) break;
        const OscillatorMode& mode =
            s.mirror_mode ? model.mirror_modes[s.oscillator].oscillator : model.suspension[s.oscillator];
        const auto tc = thermal_correlations(mode, opt.thermal, omega);
        N(i, i) = sys.quad == MechQuadrature::X ? tc.XX_sym : tc.YY_sym;
        break;
      }
      case SourceKind::shot_force:
      case SourceKind::shot_dp:
      case SourceKind::shot_qd:
        if (opt.shot_on) {
          shot_idx.push_back(i);
          shot_src.push_back(s);
        }
        break;
      case SourceKind::rin:
        N(i, i) = opt.rin_psd;
        break;
      case SourceKind::levin: {
        if (!opt.thermal_on) break;
        const double w = s.mirror == 1 ? cav.geometry().w1 : cav.geometry().w2;
        N(i, i) = levin_psd(opt.material[s.mirror - 1], w, k, opt.thermal.temperature, omega,
                            opt.illumination[s.mirror - 1]) /
                  (4.0 * k);
        break;
      }
    }
  }
  if (!shot_src.empty()) {
    const auto sc = shot_correlations(cav, v1, shot_src, omega, opt.shot_norm);
    for (size_t a = 0; a < shot_idx.size(); ++a)
      for (size_t b = 0; b < shot_idx.size(); ++b) N(shot_idx[a], shot_idx[b]) = sc.symmetrized(a, b);
  }
  return N;
}

NoiseSpectrum spectra(const Cavity& cav, const ModeVector& v1, const MechanicsModel& model,
                      const LangevinSystem& sys, const NoiseOptions& opt) {
  if (sys.omega.imag() != 0.0) throw ConfigError("spectra are defined on real frequencies");
  NoiseSpectrum out;
  out.omega = sys.omega.real();
  out.observables = sys.observables;
  Eigen::MatrixXcd T = sys.obs_n;
  if (sys.A.rows() > 0) {
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(sys.A);
    const double rc = lu.rcond();
    if (!(rc > 0.0) || !std::isfinite(rc))
      throw SingularityError("Langevin system is singular at this frequency", 0.0);
    out.condition = 1.0 / rc;
    T += sys.obs_x * lu.solve(sys.B);
  }
  const Eigen::MatrixXcd N = source_covariance(cav, v1, model, sys, opt);
  out.csd = 2.0 * T * N * T.adjoint();
  for (const char* kind : {"thermal", "shot", "rin", "levin"}) {
    Eigen::VectorXd mask = Eigen::VectorXd::Zero(N.rows());
    for (int i = 0; i < N.rows(); ++i)
      if (std::string(to_string(sys.sources[i].kind)) == kind) mask(i) = 1.0;
    const Eigen::MatrixXcd Nk = mask.asDiagonal() * N * mask.asDiagonal();
    out.by_kind[kind] = (2.0 * T * Nk * T.adjoint()).diagonal().real();
  }
  return out;
}

}  // namespace fpcav
