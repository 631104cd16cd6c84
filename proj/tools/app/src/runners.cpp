#include "fpcav_app/runners.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "fpcav/errors.hpp"

namespace fpcav::app {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void push_complex(std::vector<double>& v, cplx z) {
  v.push_back(z.real());
  v.push_back(z.imag());
}

void complex_columns(std::vector<std::string>& cols, const std::string& name) {
  cols.push_back(name + "_re");
  cols.push_back(name + "_im");
}

std::vector<int> range(int from, int to) {
  std::vector<int> r;
  for (int i = from; i < to; ++i) r.push_back(i);
  return r;
}

struct PointSetup {
  Cavity cav;
  ModeVector v1;
};

PointSetup setup(const RunConfig& p, int n_max) {
  Cavity cav(resolve_cavity(p), n_max);
  ModeVector v1 = resolve_input(p, cav);
  return {std::move(cav), std::move(v1)};
}

Evaluator stiffness_evaluator() {
  Evaluator e;
  auto names = [](const std::string& suffix) {
    std::vector<std::string> c;
    for (int J = 1; J <= 2; ++J) {
      for (int g = 0; g < kGenCount; ++g)
        complex_columns(c, "F" + std::to_string(J) + "_" + kGenNames[size_t(g)] + suffix);
      for (const char* q : {"y", "z"})
        for (int g = 0; g < kGenCount; ++g)
          complex_columns(c, "T" + std::to_string(J) + q + "_" + kGenNames[size_t(g)] + suffix);
    }
    return c;
  };
  e.columns = names("");
  const int raw = int(e.columns.size());
  for (const auto& c : names("_SI")) e.columns.push_back(c);
  e.primary = range(0, raw);
  e.eval = [](const RunConfig& p, int n) {
    const auto [cav, v1] = setup(p, n);
    const StiffnessSet s = stiffness(cav, v1, cplx(p.omega, 0.0));
    std::vector<double> out;
    for (int si = 0; si < 2; ++si)
      for (int J = 1; J <= 2; ++J) {
        const double f = si ? force_scale(cav, J) : 1.0;
        const double w = J == 1 ? cav.geometry().w1 : cav.geometry().w2;
        const double tq = si ? f * w / std::sqrt(2.0) : 1.0;
        for (int g = 0; g < kGenCount; ++g) push_complex(out, f * s.F[size_t(J - 1)][size_t(g)]);
        for (int q = 0; q < 2; ++q)
          for (int g = 0; g < kGenCount; ++g)
            push_complex(out, tq * s.T[size_t(J - 1)][size_t(q)][size_t(g)]);
      }
    return out;
  };
  return e;
}

Evaluator dp_static_evaluator() {
  Evaluator e;
  e.columns = {"s_dp", "s_qd_y", "s_qd_z"};
  e.primary = {0, 1, 2};
  e.eval = [](const RunConfig& p, int n) {
    const auto [cav, v1] = setup(p, n);
    return std::vector<double>{dp_static(cav, v1), qd_static(cav, v1, Axis::y),
                               qd_static(cav, v1, Axis::z)};
  };
  return e;
}

Evaluator dp_coeffs_evaluator() {
  Evaluator e;
  e.columns = {"s_static"};
  complex_columns(e.columns, "s_mu");
  for (int g = 0; g < kGenCount; ++g) complex_columns(e.columns, std::string("s_") + kGenNames[size_t(g)]);
  e.columns.push_back("ratio_Xy_psi");
  e.primary = range(3, 3 + 2 * kGenCount);
  e.eval = [](const RunConfig& p, int n) {
    const auto [cav, v1] = setup(p, n);
    const DPSignalSet s = dp_coefficients(cav, v1, cplx(p.omega, 0.0));
    std::vector<double> out{s.s_static};
    push_complex(out, s.s_mu);
    for (const cplx& z : s.s_vec) push_complex(out, z);
    out.push_back(std::abs(s.s_vec[kXy]) / std::abs(s.s_vec[kPsi]));
    return out;
  };
  return e;
}

const std::vector<const char*> kKinds{"thermal", "shot", "rin", "levin"};

Evaluator spectrum_evaluator(const RunConfig& cfg) {
  Evaluator e;
  const RunConfig base = apply(cfg, grid(cfg).front());
  const auto [cav, v1] = setup(base, cfg.n_max);
  const MechanicsModel model = resolve_mechanics(base, cav);
  const auto sys = assemble_langevin(cav, v1, model, base.langevin, cplx(1.0, 0.0));
  for (const auto& o : sys.observables) e.columns.push_back("S_" + o);
  for (const auto& o : sys.observables)
    for (const char* k : kKinds) e.columns.push_back("S_" + o + "_" + k);
  e.columns.push_back("condition");
  e.primary = range(0, int(sys.observables.size()));
  e.eval = [](const RunConfig& p, int n) {
    const auto [cav, v1] = setup(p, n);
    const MechanicsModel model = resolve_mechanics(p, cav);
    const auto sys = assemble_langevin(cav, v1, model, p.langevin, cplx(p.omega, 0.0));
    const NoiseSpectrum s = spectra(cav, v1, model, sys, p.noise);
    std::vector<double> out;
    for (int i = 0; i < s.csd.rows(); ++i) out.push_back(s.csd(i, i).real());
    for (int i = 0; i < s.csd.rows(); ++i)
      for (const char* k : kKinds) out.push_back(s.by_kind.at(k)(i));
    out.push_back(s.condition);
    return out;
  };
  return e;
}

int homodyne_index(const RunConfig& p, const Cavity& cav) {
  const int i = cav.basis().index(p.homodyne_mode);
  if (i < 0) throw ConfigError("pair.homodyne_mode lies outside the truncation");
  return i;
}

Evaluator entangle_evaluator() {
  Evaluator e;
  e.columns = {"E", "var_sum", "var_diff_y"};
  complex_columns(e.columns, "commutator");
  for (const char* c : {"var1", "var2", "var_diff", "sq_variance", "sq_v_min"}) e.columns.push_back(c);
  e.primary = {0};
  e.eval = [](const RunConfig& p, int n) {
    const auto [cav, v1] = setup(p, n);
    const BipartiteConfig pair = resolve_pair(p, cav);
    const BipartiteNoise noise = resolve_pair_noise(p);
    const auto r = entanglement(cav, v1, pair, noise, p.omega);
    const auto s = squeezing_spectrum(cav, v1, pair, noise, p.omega, homodyne_index(p, cav), p.homodyne_angle);
    std::vector<double> out{r.E, r.var_sum, r.var_diff_y};
    push_complex(out, r.commutator);
    for (double x : {r.var1, r.var2, r.var_diff, s.variance, s.v_min}) out.push_back(x);
    return out;
  };
  return e;
}

Evaluator squeeze_evaluator() {
  Evaluator e;
  e.columns = {"variance", "v_min", "v_max", "angle_min"};
  e.primary = {0, 1, 2};
  e.eval = [](const RunConfig& p, int n) {
    const auto [cav, v1] = setup(p, n);
    const BipartiteConfig pair = resolve_pair(p, cav);
    const auto s = squeezing_spectrum(cav, v1, pair, resolve_pair_noise(p), p.omega,
                                      homodyne_index(p, cav), p.homodyne_angle);
    return std::vector<double>{s.variance, s.v_min, s.v_max, s.angle_min};
  };
  return e;
}

double max_abs(const std::vector<double>& a, const std::vector<int>& idx) {
  double m = 0.0;
  for (int i : idx)
    if (std::isfinite(a[size_t(i)])) m = std::max(m, std::abs(a[size_t(i)]));
  return m;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b, const std::vector<int>& idx) {
  double m = 0.0;
  for (int i : idx) m = std::max(m, std::abs(a[size_t(i)] - b[size_t(i)]));
  return m;
}

const char* finesse_name(FinesseConvention c) {
  return c == FinesseConvention::log ? "log" : "standard";
}

const char* units(Command cmd) {
  switch (cmd) {
    case Command::stiffness:
      return "L m, omega rad/s, raw columns dimensionless, _SI forces N and torques N m per unit coordinate";
    case Command::dp_static:
    case Command::dp_coeffs:
      return "L m, omega rad/s, demodulated signals per unit E^2 (dimensionless)";
    case Command::spectrum:
      return "omega rad/s, single-sided PSD of each observable per Hz (coordinates in rad^2/Hz)";
    case Command::entangle:
    case Command::squeeze:
      return "omega rad/s, variances normalized to vacuum = 1, angles rad";
    case Command::modes_info:
      return "phases rad";
  }
  return "";
}

std::vector<std::string> header_block(Command cmd, const RunConfig& cfg) {
  std::vector<std::string> h;
  h.push_back(std::string("fpcav ") + to_string(cmd));
  h.push_back("config: " + cfg.source);
  h.push_back("config_hash: fnv1a64:" + cfg.hash);
  h.push_back("mode_ordering: " + ModeBasis::ordering());
  std::ostringstream conv;
  conv << "conventions: finesse=" << finesse_name(cfg.finesse_convention)
       << "; psi_units=" << (cfg.psi_in_linewidths ? "pi/F" : "rad")
       << "; spot=u~exp(-r^2/2w^2); time=exp(-i w t); radiation_sign=" << cfg.langevin.radiation_sign
       << "; shot_normalization=" << (cfg.noise.shot_norm == ShotNormalization::port_ratio ? "port_ratio" : "physical")
       << "; thermal_model=" << to_string(cfg.noise.thermal.kind);
  h.push_back(conv.str());
  h.push_back("n_max: " + std::to_string(cfg.n_max) + " (dim " +
              std::to_string(ModeBasis(cfg.n_max).dim()) + ")");
  h.push_back(std::string("units: ") + units(cmd));
  return h;
}

}  // namespace

Command parse_command(const std::string& name) {
  for (Command c : {Command::stiffness, Command::dp_static, Command::dp_coeffs, Command::spectrum,
                    Command::entangle, Command::squeeze, Command::modes_info})
    if (name == to_string(c)) return c;
  throw ConfigError("unknown command '" + name + "'");
}

const char* to_string(Command c) {
  switch (c) {
    case Command::stiffness: return "stiffness";
    case Command::dp_static: return "dp-static";
    case Command::dp_coeffs: return "dp-coeffs";
    case Command::spectrum: return "spectrum";
    case Command::entangle: return "entangle";
    case Command::squeeze: return "squeeze";
    case Command::modes_info: return "modes-info";
  }
  return "?";
}

std::vector<PointValues> grid(const RunConfig& cfg) {
  const std::vector<double> sweep = cfg.sweep.values();
  std::vector<double> series = cfg.series.values;
  if (cfg.series.param.empty()) series = {0.0};
  std::vector<PointValues> out;
  for (double s : series)
    for (double x : sweep) {
      PointValues p;
      if (!cfg.series.param.empty()) p.overrides.emplace_back(cfg.series.param, s);
      if (!cfg.sweep.param.empty()) p.overrides.emplace_back(cfg.sweep.param, x);
      out.push_back(std::move(p));
    }
  return out;
}

void parallel_for(int n, int threads, const std::function<void(int)>& f) {
  int t = threads > 0 ? threads : int(std::thread::hardware_concurrency());
  t = std::max(1, std::min(t, n));
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex m;
  auto work = [&] {
    for (int i; (i = next++) < n;) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(m);
        if (!err) err = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::jthread> pool;
  for (int k = 1; k < t; ++k) pool.emplace_back(work);
  work();
  pool.clear();
  if (err) std::rethrow_exception(err);
}

Evaluator make_evaluator(Command cmd, const RunConfig& cfg) {
  switch (cmd) {
    case Command::stiffness: return stiffness_evaluator();
    case Command::dp_static: return dp_static_evaluator();
    case Command::dp_coeffs: return dp_coeffs_evaluator();
    case Command::spectrum: return spectrum_evaluator(cfg);
    case Command::entangle: return entangle_evaluator();
    case Command::squeeze: return squeeze_evaluator();
    case Command::modes_info: break;
  }
  throw ConfigError("modes-info has no per-point evaluator");
}

namespace {

RunResult modes_info(const RunConfig& cfg) {
  RunResult res;
  const RunConfig p = apply(cfg, grid(cfg).front());
  const Cavity cav(resolve_cavity(p), cfg.n_max);
  const auto& g = cav.geometry();
  const ModeVector v1 = resolve_input(p, cav);
  auto& t = res.table;
  t.header = header_block(Command::modes_info, cfg);
  std::ostringstream os;
  os.precision(10);
  os << "geometry: L=" << cav.config().L << " m; R1=" << cav.config().R1 << " m; R2=" << cav.config().R2
     << " m; g1=" << g.g1 << "; g2=" << g.g2 << "; phi_G=" << g.phi_G << " rad; w1=" << g.w1
     << " m; w2=" << g.w2 << " m; tau=" << g.tau << " s";
  t.header.push_back(os.str());
  os.str("");
  os << "optics: finesse_log=" << g.finesse_log << "; finesse_standard=" << g.finesse_standard
     << "; finesse_pi_lnR=" << g.finesse_pi_lnR << "; E=" << g.E_amp << " Hz^1/2; calE=" << g.calE
     << " Hz^1/2; near_unstable=" << (g.near_unstable ? "yes" : "no");
  t.header.push_back(os.str());
  t.columns = {"index", "ly", "lz", "order", "interior", "gouy_rt_rad", "input_abs", "input_arg_rad"};
  for (int i = 0; i < cav.basis().dim(); ++i) {
    const auto& m = cav.basis().mode(i);
    const double phase = std::remainder(2.0 * (m.order() + 1) * g.phi_G, 2.0 * phys::pi);
    t.rows.push_back({double(i), double(m.ly), double(m.lz), double(m.order()),
                      cav.basis().interior(i) ? 1.0 : 0.0, phase, std::abs(v1(i)), std::arg(v1(i))});
  }
  return res;
}

}  // namespace

RunResult run(Command cmd, const RunConfig& cfg) {
  if (cmd == Command::modes_info) return modes_info(cfg);
  const Evaluator ev = make_evaluator(cmd, cfg);
  const auto points = grid(cfg);
  const int n = int(points.size());
  std::vector<std::vector<double>> values(static_cast<size_t>(n));
  std::vector<double> delta(size_t(n), kNaN);  // absolute, normalized after the sweep
  std::vector<char> singular(size_t(n), 0);
  const size_t width = ev.columns.size();

  parallel_for(n, cfg.threads, [&](int i) {
    const RunConfig p = apply(cfg, points[size_t(i)]);
    try {
      values[size_t(i)] = ev.eval(p, cfg.n_max);
      if (values[size_t(i)].size() != width) throw std::logic_error("column count mismatch");
      if (cfg.check_convergence)
        delta[size_t(i)] = max_abs_diff(values[size_t(i)], ev.eval(p, cfg.n_max + 2), ev.primary);
    } catch (const SingularityError&) {
      singular[size_t(i)] = 1;
      values[size_t(i)].assign(width, kNaN);
    } catch (const ConvergenceError&) {
      singular[size_t(i)] = 1;
      values[size_t(i)].assign(width, kNaN);
    }
  });

  // convergence deltas relative to the largest primary magnitude of the same series
  const size_t per_series = cfg.sweep.values().size();
  if (cfg.check_convergence)
    for (size_t s0 = 0; s0 < size_t(n); s0 += per_series) {
      double scale = 0.0;
      for (size_t i = s0; i < s0 + per_series; ++i)
        if (!singular[i]) scale = std::max(scale, max_abs(values[i], ev.primary));
      for (size_t i = s0; i < s0 + per_series; ++i)
        if (scale > 0.0) delta[i] /= scale;
    }

  RunResult res;
  res.convergence_checked = cfg.check_convergence;
  auto& t = res.table;
  t.header = header_block(cmd, cfg);
  if (!cfg.series.param.empty()) t.columns.push_back(cfg.series.param);
  t.columns.push_back(cfg.sweep.param.empty() ? "point" : cfg.sweep.param);
  t.columns.push_back("singular");
  for (const auto& c : ev.columns) t.columns.push_back(c);
  if (cfg.check_convergence) t.columns.push_back("convergence_delta");

  const auto sweep = cfg.sweep.values();
  for (int i = 0; i < n; ++i) {
    std::vector<double> row;
    if (!cfg.series.param.empty()) row.push_back(cfg.series.values[size_t(i) / per_series]);
    row.push_back(sweep[size_t(i) % per_series]);
    row.push_back(singular[size_t(i)]);
    row.insert(row.end(), values[size_t(i)].begin(), values[size_t(i)].end());
    if (cfg.check_convergence) {
      row.push_back(delta[size_t(i)]);
      if (!singular[size_t(i)]) res.max_convergence_delta = std::max(res.max_convergence_delta, delta[size_t(i)]);
    }
    res.singular_points += singular[size_t(i)];
    t.rows.push_back(std::move(row));
  }

  std::string primary;
  for (int c : ev.primary) primary += (primary.empty() ? "" : " ") + ev.columns[size_t(c)];
  if (cfg.check_convergence)
    t.header.push_back("convergence: n_max " + std::to_string(cfg.n_max + 2) + " vs " +
                       std::to_string(cfg.n_max) + ", max relative delta " +
                       format_number(res.max_convergence_delta) + " over primary columns, scaled by the largest primary magnitude of each series");
  else
    t.header.push_back("convergence: not checked (use --check-convergence)");
  t.header.push_back("singular_points: " + std::to_string(res.singular_points));
  t.header.push_back("primary: " + primary);
  return res;
}

}  // namespace fpcav::app
