// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any selected criterion fails.
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "fpcav/bipartite.hpp"
#include "fpcav/errors.hpp"
#include "fpcav_app/runners.hpp"

using namespace fpcav;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "ok: " : "FAILED: ") + what);
  }
  void info(const std::string& what) { notes.push_back("info: " + what); }
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << v;
  return os.str();
}

app::RunConfig preset(const std::string& name) {
  return app::parse_config(app::read_config_file(std::string(FPCAV_PRESET_DIR) + "/" + name));
}

app::RunConfig preset(const std::string& name, const std::vector<std::array<std::string, 3>>& overrides) {
  auto t = app::read_config_file(std::string(FPCAV_PRESET_DIR) + "/" + name);
  for (const auto& [sec, key, val] : overrides) app::set_value(t, sec, key, val);
  return app::parse_config(t);
}

double cabs(const app::Table& t, const std::vector<double>& row, const std::string& name) {
  return std::hypot(row[size_t(t.column(name + "_re"))], row[size_t(t.column(name + "_im"))]);
}

// Rows of one series, in sweep order.
std::vector<std::vector<double>> series_rows(const app::Table& t, double value) {
  std::vector<std::vector<double>> out;
  for (const auto& r : t.rows)
    if (r[0] == value) out.push_back(r);
  return out;
}

CavityConfig bench(double psi, double power) {
  CavityConfig c;
  c.L = 0.05;
  c.R1 = -0.08;
  c.R2 = 0.08;
  auto [r, t] = mirror_from_finesse(300, FinesseConvention::log);
  c.r1 = c.r2 = r;
  c.t1 = c.t2 = t;
  c.psi = psi;
  c.power = power;
  return c;
}

ModeVector fundamental(int d) {
  ModeVector v = ModeVector::Zero(d);
  v(0) = 1.0;
  return v;
}

OscillatorMode osc(int mirror, int dof, double omega0, double gamma, double mass = 1e-3) {
  OscillatorMode m;
  m.mirror = mirror;
  m.mass = mass;
  m.omega0 = omega0;
  m.gamma = gamma;
  if (dof >= 0) m.K[size_t(dof)] = 1.0;
  return m;
}

// ---------------------------------------------------------------- 1
Outcome field_amplitude() {
  Outcome o;
  CavityConfig c = bench(0.0, 1.0);
  c.lambda = 1e-6;
  const double E = derive_geometry(c).E_amp;
  const double quoted = 2.5e9;
  o.check(std::abs(E - quoted) / quoted < 0.15, "E = " + fmt(E) + " Hz^1/2 within 15% of " + fmt(quoted));
  o.check(std::abs(E - std::sqrt(1.0 / (phys::hbar * phys::c * 2 * phys::pi / 1e-6))) < 1e-6 * E,
          "E equals sqrt(P/hbar omega)");
  return o;
}

// ---------------------------------------------------------------- 2
Outcome green_series() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0.0;
  int tuples = 0, skipped = 0;
  while (tuples < 100) {
    CavityConfig c;
    c.L = 0.02 + 0.18 * u(rng);
    const double R = c.L * (0.55 + 2.0 * u(rng));
    c.R1 = -R;
    c.R2 = R;
    auto [r, t] = mirror_from_finesse(50 + 950 * u(rng), FinesseConvention::log);
    c.r1 = c.r2 = r;
    c.t1 = c.t2 = t;
    c.psi = phys::pi * (2 * u(rng) - 1);
    c.mod_freq = 1e8 * u(rng);
    c.mod_depth = 0.5;
    const int p = int(std::floor(7 * u(rng))) - 3;
    const double w = 1e7 * u(rng);
    const Cavity cav(c, 2);
    // independent round-trip factor: R e^{i(pΛ + ϖ)τ} e^{-iψ} e^{-2inφ_G}
    const double g1 = 1 + c.L / c.R1, g2 = 1 - c.L / c.R2;
    const double phiG = std::acos((g1 < 0 ? -1 : 1) * std::sqrt(g1 * g2));
    const double tau = 2 * c.L / phys::c;
    bool near_pole = false;
    std::vector<cplx> x;
    for (int i = 0; i < cav.basis().dim(); ++i) {
      const int n = cav.basis().mode(i).order();
      x.push_back(c.r1 * c.r2 * std::exp(I * ((p * c.mod_freq + w) * tau - c.psi - 2.0 * n * phiG)));
      if (std::abs(1.0 - x.back()) < 1e-3) near_pole = true;
    }
    if (near_pole) {
      ++skipped;
      continue;
    }
    const ModeDiagonal G = cav.green(p, w);
    for (size_t i = 0; i < x.size(); ++i) {
      cplx sum = 0.0, term = 1.0, comp = 0.0;
      for (int k = 0; k < 100000; ++k) {  // compensated summation
        const cplx y = term - comp;
        const cplx s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        term *= x[i];
      }
      worst = std::max(worst, std::abs(G(int(i)) - sum) / std::abs(sum));
    }
    ++tuples;
  }
  o.check(worst < 1e-10, "100 tuples, worst relative deviation " + fmt(worst) + " (" +
                             std::to_string(skipped) + " pole-adjacent draws redrawn)");
  return o;
}

// ---------------------------------------------------------------- 3
double resummed(const Cavity& cav, const ModeVector& v, const ModeMatrix* L, const ModeMatrix& gen, double eps) {
  const int d = cav.basis().dim();
  const ModeMatrix U = (-I * eps * gen).exp();
  double acc = 0.0;
  for (const auto& [p, J] : cav.harmonics()) {
    const ModeMatrix T = cav.loop(p) * cav.phi().asDiagonal() * U;
    const ModeVector f = (ModeMatrix::Identity(d, d) - T).partialPivLu().solve(v);
    acc += J * J * (L ? f.dot(*L * f) : f.dot(f)).real();
  }
  return acc;
}

double central_difference(const Cavity& cav, const ModeVector& v, const ModeMatrix* L, const ModeMatrix& gen) {
  auto d = [&](double h) { return (resummed(cav, v, L, gen, h) - resummed(cav, v, L, gen, -h)) / (2 * h); };
  const double h = 1e-4;
  return (4 * d(h / 2) - d(h)) / 3;  // Richardson step
}

Outcome stiffness_fd() {
  Outcome o;
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0.0;
  int count = 0;
  for (int trial = 0; trial < 20; ++trial) {
    CavityConfig c;
    c.L = 0.03 + 0.05 * u(rng);
    const double R = 0.05 + 0.2 * u(rng);
    c.R1 = -R;
    c.R2 = R;
    auto [r, t] = mirror_from_finesse(80 + 200 * u(rng), FinesseConvention::log);
    c.r1 = c.r2 = r;
    c.t1 = c.t2 = t;
    c.psi = (u(rng) - 0.5) * 0.05;
    c.mod_depth = 0.2 * u(rng);
    c.mod_freq = 4e7;
    const Cavity cav(c, 3);
    InputBeam b = matched_beam(c.R1, cav.geometry().w1, cav.geometry().k);
    b.theta_y = 2e-5 * u(rng);
    b.theta_z = 3e-5 * u(rng);
    const ModeVector v1 = input_vector(cav.basis(), b);
    const ModeVector v2 = cav.to_mirror2(v1);
    const StiffnessSet s = stiffness(cav, v1, 0.0);
    const auto gens = generator_set(cav);
    const auto& q = cav.quadratures();
    const ModeVector* vs[2] = {&v1, &v2};
    double scale = 0.0;
    for (int J = 0; J < 2; ++J) scale = std::max(scale, std::abs(s.F[size_t(J)][kPsi]));
    auto cmp = [&](cplx a, double ref) {
      worst = std::max(worst, std::abs(a - ref) / std::max(std::abs(ref), 1e-3 * scale));
      ++count;
    };
    for (int J = 0; J < 2; ++J)
      for (int i = 0; i < kGenCount; ++i) {
        cmp(s.F[size_t(J)][size_t(i)], central_difference(cav, *vs[J], nullptr, gens[size_t(i)]));
        cmp(s.T[size_t(J)][0][size_t(i)], central_difference(cav, *vs[J], &q.Xy, gens[size_t(i)]));
        cmp(s.T[size_t(J)][1][size_t(i)], central_difference(cav, *vs[J], &q.Xz, gens[size_t(i)]));
      }
  }
  o.check(worst < 1e-6, std::to_string(count) + " force and torque coefficients over 20 configurations, worst " +
                            fmt(worst) + " (relative, floor 1e-3 of |F_psi|)");
  return o;
}

// ---------------------------------------------------------------- 4
const std::vector<std::string> kPlotted{"F1_psi", "F1_Xy", "F1_Xz", "F1_Yy", "T1z_Xz", "T1z_Yy", "T1z_Yz"};
const std::vector<std::string> kCross{"F1_Xy", "F1_Xz", "F1_Yy", "F1_Yz", "T1y_psi",
                                      "T1z_psi", "T1y_Xz", "T1y_Yz", "T1z_Xy", "T1z_Yy"};

Outcome stiffness_shape() {
  Outcome o;
  const auto cfg = preset("stiffness_length.ini");
  const auto res = app::run(app::Command::stiffness, cfg);
  const auto& t = res.table;

  const auto aligned = app::run(app::Command::stiffness,
                                preset("stiffness_length.ini", {{{"beam", "theta_y", "0"}, {"beam", "theta_z", "0"}}}));
  double worst_aligned = 0.0;
  for (const auto& r : aligned.table.rows)
    for (const auto& c : kCross)
      worst_aligned = std::max(worst_aligned, cabs(aligned.table, r, c) / cabs(aligned.table, r, "F1_psi"));
  o.check(worst_aligned < 1e-12, "(a) aligned: max |cross|/|F_psi| = " + fmt(worst_aligned));

  for (double psi : cfg.series.values) {
    const auto rows = series_rows(t, psi);
    const size_t n = rows.size();
    double best = 0.0;
    std::string which;
    for (size_t i = n - n / 3; i < n; ++i)
      for (const auto& c : kCross) {
        const double ratio = cabs(t, rows[i], c) / cabs(t, rows[i], "F1_psi");
        if (ratio > best) best = ratio, which = c;
      }
    o.check(best > 0.1, "(b) psi = " + fmt(psi) + " pi/F: max cross/|F_psi| in the near-concentric third = " +
                            fmt(best) + " (" + which + ")");

    const size_t tail = std::max<size_t>(2, size_t(std::ceil(0.1 * double(n - 1))) + 1);
    std::string falling;
    for (const auto& c : kPlotted) {
      bool rising = true;
      for (size_t i = n - tail + 1; i < n; ++i)
        if (!(cabs(t, rows[i], c) > cabs(t, rows[i - 1], c))) rising = false;
      if (!rising) falling += (falling.empty() ? "" : " ") + c;
    }
    o.check(falling.empty(), "(c) psi = " + fmt(psi) + " pi/F: magnitudes rising over the last " +
                                 std::to_string(tail) + " points" +
                                 (falling.empty() ? "" : "; not rising: " + falling));
  }
  return o;
}

// ---------------------------------------------------------------- 5
Outcome dp_characteristic() {
  Outcome o;
  const auto cfg = preset("dp_static.ini");
  const auto res = app::run(app::Command::dp_static, cfg);
  const auto& t = res.table;
  const int cs = t.column("s_dp");
  const size_t n = t.rows.size();
  std::vector<double> psi(n), s(n);
  double peak = 0.0;
  for (size_t i = 0; i < n; ++i) {
    psi[i] = t.rows[i][0];
    s[i] = t.rows[i][size_t(cs)];
    peak = std::max(peak, std::abs(s[i]));
  }
  double asym = 0.0;
  for (size_t i = 0; i < n; ++i) asym = std::max(asym, std::abs(s[i] + s[n - 1 - i]));
  o.check(asym / peak < 1e-10, "odd in psi: max |s(psi) + s(-psi)|/max|s| = " + fmt(asym / peak));

  // zero crossings on the open interval with a 5% hysteresis band
  auto count_crossings = [](const std::vector<double>& y, double peak_abs) {
    const double band = 0.05 * peak_abs;
    int crossings = 0, state = 0;
    for (size_t i = 1; i + 1 < y.size(); ++i) {
      const int now = y[i] > band ? 1 : (y[i] < -band ? -1 : 0);
      if (now != 0 && state != 0 && now != state) ++crossings;
      if (now != 0) state = now;
    }
    return crossings;
  };
  const int crossings = count_crossings(s, peak);
  o.check(crossings == 1, "zero crossings inside one free spectral range at phi = 0: " + std::to_string(crossings) +
                              " (5% hysteresis)");
  {
    const auto quad = app::run(app::Command::dp_static,
                               preset("dp_static.ini", {{{"modulation", "demod_phase", "1.5707963267948966"}}}));
    std::vector<double> y;
    double pk = 0.0;
    for (const auto& r : quad.table.rows) {
      y.push_back(r[size_t(cs)]);
      pk = std::max(pk, std::abs(y.back()));
    }
    o.info("zero crossings at phi = pi/2: " + std::to_string(count_crossings(y, pk)));
  }

  const size_t imax = size_t(std::max_element(s.begin(), s.end()) - s.begin());
  const size_t imin = size_t(std::min_element(s.begin(), s.end()) - s.begin());
  const double sep = std::abs(psi[imax] - psi[imin]);
  const double fwhm = 2 * phys::pi / cfg.finesse;
  o.check(std::abs(sep / fwhm - 1) < 0.3, "extrema separation " + fmt(sep) + " rad vs linewidth " + fmt(fwhm) +
                                              " rad (ratio " + fmt(sep / fwhm) + ")");
  return o;
}

// ---------------------------------------------------------------- 6
Outcome dp_misalignment() {
  Outcome o;
  const auto cfg = preset("dp_coeffs_length.ini");
  const auto res = app::run(app::Command::dp_coeffs, cfg);
  const auto& t = res.table;
  const int cr = t.column("ratio_Xy_psi");
  double best = 0.0;
  std::string not_rising;
  for (double psi : cfg.series.values) {
    const auto rows = series_rows(t, psi);
    bool rising = true;
    for (size_t i = 1; i < rows.size(); ++i) {
      // the sweep runs toward shorter cavities, i.e. toward a smaller stability margin 1 - g1 g2
      if (!(rows[i][size_t(cr)] >= rows[i - 1][size_t(cr)])) rising = false;
      best = std::max(best, rows[i][size_t(cr)]);
    }
    if (!rising) not_rising += (not_rising.empty() ? "" : " ") + fmt(psi);
  }
  o.check(not_rising.empty(), "|s_Xy/s_psi| rises as the stability margin shrinks" +
                                  (not_rising.empty() ? std::string() : "; not monotone for psi = " + not_rising + " pi/F"));
  o.check(best > 0.1, "misaligned: max |s_Xy/s_psi| = " + fmt(best));

  const auto aligned = app::run(app::Command::dp_coeffs, preset("dp_coeffs_length.ini", {{{"beam", "theta_y", "0"}}}));
  double worst = 0.0;
  for (const auto& r : aligned.table.rows) worst = std::max(worst, r[size_t(cr)]);
  o.check(worst < 1e-12, "aligned: max |s_Xy/s_psi| = " + fmt(worst));
  return o;
}

// ---------------------------------------------------------------- 7
cplx scalar_stiffness(const Cavity& cav, cplx w) {
  const cplx ell = cav.loop(0) * cav.phi()(0);
  const cplx G = 1.0 / (1.0 - ell);
  const double tau = cav.geometry().tau;
  auto f = [&](cplx x) { return ell * std::norm(G) / (1.0 - ell * std::exp(I * x * tau)); };
  return 2.0 * (f(w) - std::conj(f(-std::conj(w)))) / (2.0 * I);
}

int named(const std::vector<std::string>& names, const std::string& n) {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == n) return int(i);
  return -1;
}

Outcome langevin() {
  Outcome o;
  {
    const Cavity cav(bench(0.006, 0.5), 0);
    const ModeVector v = fundamental(1);
    MechanicsModel model;
    model.suspension = {osc(1, kDofPsi, 2e3, 3.0), osc(2, kDofPsi, 2.6e3, 2.0)};
    const double k = cav.geometry().k, E = cav.geometry().calE, tau = cav.geometry().tau;
    double worst = 0.0;
    for (cplx w : {cplx(1.9e3, 0), cplx(2.5e3, 0), cplx(40, 0)}) {
      const auto sys = assemble_langevin(cav, v, model, {}, w);
      const cplx Kst = scalar_stiffness(cav, w);
      const cplx d1 = std::exp(I * w * tau), dh = std::exp(I * w * tau / 2.0);
      cplx chi[2], g[2];
      for (int J = 0; J < 2; ++J) {
        chi[J] = susceptibility(model.suspension[size_t(J)], k, w);
        g[J] = -chi[J] * radiation_prefactor(cav.config(), J + 1, false) * E * E * Kst;
      }
      const cplx a11 = 1.0 - g[0] * d1, a12 = -g[0] * dh, a21 = -g[1] * dh, a22 = 1.0 - g[1] * d1;
      const cplx det = a11 * a22 - a12 * a21;
      const cplx b1 = thermal_weight(model.suspension[0], k) * chi[0];
      std::vector<std::string> src;
      for (const auto& s : sys.sources) src.push_back(s.name);
      const auto r = solve_transfer(sys, named(src, "thermal:axial1"));
      std::vector<std::string> coords;
      for (const auto& c : sys.coords) coords.push_back(c.name);
      const cplx x1 = b1 * a22 / det, x2 = -a21 * b1 / det;
      worst = std::max(worst, std::abs(r.x(named(coords, "psi1")) - x1) / std::abs(x1));
      worst = std::max(worst, std::abs(r.x(named(coords, "psi2")) - x2) / std::abs(x1));
    }
    o.check(worst < 1e-10, "2-DOF hand-solved instance, worst relative deviation " + fmt(worst));
  }
  {
    const Cavity cav(bench(0.01, 0.0), 1);
    MechanicsModel model;
    model.suspension = {osc(1, kDofPsi, 300, 2.0), osc(1, kDofThetaY, 520, 1.0), osc(2, kDofPsi, 410, 8.0)};
    LangevinOptions opt;
    const auto roots = free_oscillations(cav, fundamental(cav.basis().dim()), model, opt, default_windows(model, opt));
    std::vector<cplx> expect;
    for (const auto& m : model.suspension)
      expect.push_back(cplx(std::sqrt(m.omega0 * m.omega0 - m.gamma * m.gamma / 4), -m.gamma / 2));
    std::sort(expect.begin(), expect.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    double worst = roots.size() == expect.size() ? 0.0 : 1.0;
    for (size_t i = 0; i < std::min(roots.size(), expect.size()); ++i)
      worst = std::max(worst, std::abs(roots[i].omega - expect[i]) / std::abs(expect[i]));
    o.check(worst < 1e-8, "dark-cavity eigenfrequencies vs damped poles, worst relative " + fmt(worst));
  }
  {
    const double psi = 0.004, w0 = 2 * phys::pi * 200, gamma = 0.05, mass = 1e-3, power = 0.02;
    const Cavity cav(bench(psi, power), 0);
    MechanicsModel model;
    model.suspension = {osc(1, kDofPsi, w0, gamma, mass)};
    LangevinOptions opt;
    const auto roots = free_oscillations(cav, fundamental(1), model, opt, default_windows(model, opt));
    const double shift = roots.empty() ? 0.0 : roots[0].omega.real() - std::sqrt(w0 * w0 - gamma * gamma / 4);
    const double k = cav.geometry().k, h = 1e-6;
    auto force = [&](double p) {
      const Cavity c(bench(p, power), 0);
      return force_scale(c, 1) * static_force_matrices(c).F0(0, 0).real();
    };
    const double spring = 2 * k * (force(psi + h) - force(psi - h)) / (2 * h);
    const double expect = spring / (2 * mass * w0);
    const double rel = std::abs(shift - expect) / std::abs(expect);
    o.check(roots.size() == 1 && rel < 0.01, "optical-spring shift " + fmt(shift) + " rad/s vs perturbation theory " +
                                                 fmt(expect) + " rad/s (relative " + fmt(rel) + ")");
  }
  return o;
}

// ---------------------------------------------------------------- 8
Outcome thermal() {
  Outcome o;
  const OscillatorMode m = osc(1, kDofPsi, 2 * phys::pi * 10, 0.05);
  const ThermalModel bro{ThermalModelKind::brownian, 300.0, false};
  const ThermalModel dio{ThermalModelKind::diosi, 300.0, true};
  const ThermalModel gv{ThermalModelKind::gv, 300.0, false};
  bool same = true;
  for (double w : {0.3 * m.omega0, m.omega0, 7.0 * m.omega0, -2.0 * m.omega0}) {
    const double a = thermal_correlations(m, bro, w).commutator;
    same = same && a == thermal_correlations(m, dio, w).commutator && a == thermal_correlations(m, gv, w).commutator;
  }
  o.check(same, "commutator identical across brownian, diosi, gv");

  const double hw_kT = phys::hbar * m.omega0 / (phys::kB * 300.0);
  const auto a = thermal_correlations(m, bro, m.omega0), b = thermal_correlations(m, dio, m.omega0);
  const double dev = std::max(std::abs(a.XX_sym - b.XX_sym) / a.XX_sym, std::abs(a.YY_sym - b.YY_sym) / a.YY_sym);
  o.check(dev < hw_kT, "diosi vs brownian at 300 K, 10 Hz: " + fmt(dev) + " < hbar w/kT = " + fmt(hw_kT));

  const MirrorMaterial fs{7.2e10, 0.17, 1e-6};
  const double k = 2 * phys::pi / 1.064e-6, w = 2e-3, f = 2 * phys::pi * 10;
  const double base = levin_psd(fs, w, k, 300.0, f);
  MirrorMaterial lossy = fs;
  lossy.loss_angle *= 2;
  o.check(levin_psd(fs, w, k, 600.0, f) == 2 * base, "levin PSD doubles with T");
  o.check(levin_psd(lossy, w, k, 300.0, f) == 2 * base, "levin PSD doubles with the loss angle");
  o.check(levin_psd(fs, w, k, 300.0, 2 * f) == base / 2, "levin PSD halves when the frequency doubles");
  return o;
}

// ---------------------------------------------------------------- 9
Outcome shot_paths() {
  Outcome o;
  std::mt19937 rng(91);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    CavityConfig c = bench(0.02 * u(rng), 1.0);
    c.L = 0.05 * (1 + 0.3 * u(rng));
    c.mod_depth = trial % 2 ? 0.3 : 0.0;
    c.mod_freq = 4e7;
    const Cavity cav(c, 1 + trial % 3);
    const int d = cav.basis().dim();
    InputBeam b = matched_beam(c.R1, cav.geometry().w1, cav.geometry().k);
    b.theta_y = 3e-5 * u(rng);
    b.theta_z = 3e-5 * u(rng);
    const ModeVector v = input_vector(cav.basis(), b);
    const auto& q = cav.quadratures();
    const ModeMatrix def = ModeMatrix::Identity(d, d) + 0.1 * (q.Xy * q.Xy + q.Xz * q.Xz);
    std::vector<ForceChannel> ch;
    for (int J = 1; J <= 2; ++J)
      for (const ModeMatrix* g : {&q.Xy, &q.Xz, &def}) ch.push_back({J, *g});
    ch.push_back({1, ModeMatrix::Identity(d, d)});
    const double w = 1e6 * (1 + u(rng));
    for (auto norm : {ShotNormalization::port_ratio, ShotNormalization::physical}) {
      const auto A = shot_correlation_direct(cav, v, ch, w, norm);
      const auto B = shot_correlation_projector(cav, v, ch, w, norm);
      worst = std::max(worst, (A - B).norm() / A.norm());
    }
  }
  o.check(worst < 1e-12, "20 random instances, worst relative difference " + fmt(worst));
  return o;
}

// ---------------------------------------------------------------- 10
Outcome bipartite() {
  Outcome o;
  const auto cfg = preset("entangle.ini");
  const Cavity cav(app::resolve_cavity(cfg), cfg.n_max);
  const ModeVector v1 = app::resolve_input(cfg, cav);
  const BipartiteConfig pair = app::resolve_pair(cfg, cav);
  const BipartiteNoise noise = app::resolve_pair_noise(cfg);
  const auto omegas = cfg.sweep.values();

  double inv = 0.0, par = 0.0;
  bool nonneg = true;
  for (size_t i = 0; i < omegas.size(); i += 10) {
    const auto e = entanglement(cav, v1, pair, noise, omegas[i]);
    nonneg = nonneg && e.E >= 0.0;
    par = std::max(par, std::abs(e.var_sum + e.var_diff - 2 * (e.var1 + e.var2)) / (e.var1 + e.var2));
    for (double s : {1e-3, 7.0, 1e4}) {
      BipartiteNoise scaled = noise;
      scaled.response_scale = s;
      inv = std::max(inv, std::abs(entanglement(cav, v1, pair, scaled, omegas[i]).E - e.E) / e.E);
    }
  }
  o.check(inv < 1e-12 && nonneg, "E invariant under common rescaling (1e-3, 7, 1e4): worst " + fmt(inv));
  o.check(par < 1e-12, "parallelogram variance identity: worst " + fmt(par));

  CavityConfig dark_cfg = cav.config();
  dark_cfg.power = 0.0;
  const Cavity dark(dark_cfg, cfg.n_max);
  BipartiteNoise quiet = noise;
  quiet.thermal_on = false;
  double vac = 0.0;
  for (size_t i = 0; i < omegas.size(); i += 20)
    for (double th : {0.0, 0.7, 1.9})
      vac = std::max(vac, std::abs(squeezing_spectrum(dark, v1, pair, quiet, omegas[i], 0, th).variance - 1.0));
  o.check(vac < 1e-12, "no field: squeezing variance = 1, worst deviation " + fmt(vac));

  // the bath zero-point noise accompanies the damping, so the bound holds with the GV model
  BipartiteNoise cold = noise;
  cold.thermal.kind = ThermalModelKind::gv;
  cold.thermal.temperature = 1e-9;
  double low = 1e300, low_cold = 1e300;
  for (int i = 0; i < 200; ++i) {
    const double w = omegas.front() + (omegas.back() - omegas.front()) * i / 199.0;
    const auto s = squeezing_spectrum(cav, v1, pair, noise, w);
    const auto c = squeezing_spectrum(cav, v1, pair, cold, w);
    low = std::min(low, s.v_min * s.v_max);
    low_cold = std::min(low_cold, c.v_min * c.v_max);
  }
  o.check(low >= 1.0 - 1e-9 && low_cold >= 1.0 - 1e-9,
          "V_min V_max >= 1 on 200 points: min " + fmt(low) + " (preset), " + fmt(low_cold) + " (ground-state bath)");
  return o;
}

// ---------------------------------------------------------------- 11
Outcome convergence() {
  Outcome o;
  const std::vector<std::pair<std::string, app::Command>> runs{
      {"stiffness_length.ini", app::Command::stiffness}, {"dp_static.ini", app::Command::dp_static},
      {"dp_coeffs_length.ini", app::Command::dp_coeffs}, {"spectrum.ini", app::Command::spectrum},
      {"entangle.ini", app::Command::entangle},          {"entangle.ini", app::Command::squeeze}};
  for (const auto& [name, cmd] : runs) {
    auto cfg = preset(name);
    cfg.n_max = 6;
    cfg.check_convergence = true;
    const auto r = app::run(cmd, cfg);
    o.check(r.max_convergence_delta < 1e-2 && r.singular_points == 0,
            name + " (" + app::to_string(cmd) + "): n_max 8 vs 6 relative delta " + fmt(r.max_convergence_delta));
  }
  return o;
}

struct Criterion {
  int id;
  std::string title;
  double budget;  // s
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "field amplitude", 1e-3, field_amplitude},
      {2, "resummed Green function vs geometric series", 5, green_series},
      {3, "stiffness vs finite differences", 30, stiffness_fd},
      {4, "stiffness vs length toward the concentric limit", 60, stiffness_shape},
      {5, "static error-signal characteristic", 10, dp_characteristic},
      {6, "error-signal misalignment coefficient vs length", 60, dp_misalignment},
      {7, "Langevin solver", 10, langevin},
      {8, "thermal models", 5, thermal},
      {9, "shot-noise correlation paths", 1e9, shot_paths},
      {10, "bipartite entanglement and squeezing", 30, bipartite},
      {11, "truncation convergence of every preset", 1e9, convergence},
  };
  std::vector<int> chosen;
  for (int i = 1; i < argc; ++i) chosen.push_back(std::stoi(argv[i]));
  int failed = 0;
  for (const auto& c : all) {
    if (!chosen.empty() && std::find(chosen.begin(), chosen.end(), c.id) == chosen.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (dt > c.budget) o.check(false, "runtime " + fmt(dt) + " s exceeds " + fmt(c.budget) + " s");
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << std::setw(2) << c.id << "  " << c.title << "  ("
              << fmt(dt) << " s)\n";
    for (const auto& n : o.notes) std::cout << "        " << n << "\n";
    failed += o.pass ? 0 : 1;
  }
  return failed ? 1 : 0;
}
