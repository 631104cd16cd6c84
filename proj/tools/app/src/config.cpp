#include "fpcav_app/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>

#include "fpcav/errors.hpp"

namespace fpcav::app {

namespace pt = boost::property_tree;

std::vector<double> SweepSpec::values() const {
  if (param.empty() || count <= 1) return {min};
  std::vector<double> v(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double f = double(i) / double(count - 1);
    v[size_t(i)] = scale == SweepScale::log ? min * std::pow(max / min, f) : min + (max - min) * f;
  }
  return v;
}

const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> names{
      "L",     "psi",     "omega", "theta_y",     "theta_z",   "eps_y",     "eps_z",
      "power", "finesse", "spot",  "demod_phase", "mod_depth", "temperature"};
  return names;
}

namespace {

std::string fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

// Canonical dump: sections and keys sorted, values trimmed.
std::string canonical(const pt::ptree& t) {
  std::vector<std::string> lines;
  for (const auto& [sec, node] : t)
    for (const auto& [key, val] : node) lines.push_back(sec + "." + key + "=" + val.data());
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::map<std::string, int> index_lines(std::istream& in) {
  static const std::regex section(R"(^\s*\[([^\]]+)\]\s*$)");
  static const std::regex key(R"(^\s*([^=;#\s][^=]*?)\s*=)");
  std::map<std::string, int> out;
  std::string line, sec;
  for (int n = 1; std::getline(in, line); ++n) {
    std::smatch m;
    if (std::regex_match(line, m, section))
      sec = boost::trim_copy(m[1].str());
    else if (std::regex_search(line, m, key))
      out.emplace(sec + "." + m[1].str(), n);
  }
  return out;
}

ConfigTree read_stream(std::istream& in, const std::string& source) {
  std::stringstream buf;
  buf << in.rdbuf();
  ConfigTree t;
  t.source = source;
  try {
    pt::ini_parser::read_ini(buf, t.tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  buf.clear();
  buf.seekg(0);
  t.lines = index_lines(buf);
  return t;
}

/// Typed access with field and line diagnostics; tracks which keys were consumed.
class Reader {
 public:
  explicit Reader(const ConfigTree& t) : t_(t) {}

  bool has(const std::string& sec, const std::string& key) const {
    const auto s = t_.tree.find(sec);
    return s != t_.tree.not_found() && s->second.find(key) != s->second.not_found();
  }

  std::string raw(const std::string& sec, const std::string& key) {
    used_.insert(sec + "." + key);
    std::string v = t_.tree.find(sec)->second.find(key)->second.data();
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
      return v.substr(1, v.size() - 2);
    const auto hash = v.find(" #");
    if (hash != std::string::npos) v = v.substr(0, hash);
    return boost::trim_copy(v);
  }

  [[noreturn]] void fail(const std::string& sec, const std::string& key, const std::string& msg) const {
    std::string where = t_.source;
    const auto it = t_.lines.find(sec + "." + key);
    if (it != t_.lines.end()) where += ":" + std::to_string(it->second);
    throw ConfigError(where + ": " + sec + "." + key + ": " + msg);
  }

  void num(const std::string& sec, const std::string& key, double& out) {
    if (!has(sec, key)) return;
    const std::string v = raw(sec, key);
    try {
      size_t pos = 0;
      out = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
    } catch (const std::exception&) {
      fail(sec, key, "expected a number, got '" + v + "'");
    }
  }

  void integer(const std::string& sec, const std::string& key, int& out) {
    if (!has(sec, key)) return;
    const std::string v = raw(sec, key);
    try {
      out = boost::lexical_cast<int>(v);
    } catch (const boost::bad_lexical_cast&) {
      fail(sec, key, "expected an integer, got '" + v + "'");
    }
  }

  void flag(const std::string& sec, const std::string& key, bool& out) {
    if (!has(sec, key)) return;
    const std::string v = boost::to_lower_copy(raw(sec, key));
    if (v == "true" || v == "1" || v == "yes" || v == "on")
      out = true;
    else if (v == "false" || v == "0" || v == "no" || v == "off")
      out = false;
    else
      fail(sec, key, "expected true or false, got '" + v + "'");
  }

  void text(const std::string& sec, const std::string& key, std::string& out) {
    if (has(sec, key)) out = raw(sec, key);
  }

  std::vector<std::string> list(const std::string& sec, const std::string& key) {
    std::string v = raw(sec, key);
    if (v.size() >= 2 && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
    std::vector<std::string> parts;
    boost::split(parts, v, boost::is_any_of(","));
    for (auto& p : parts) {
      boost::trim(p);
      if (p.size() >= 2 && p.front() == '"' && p.back() == '"') p = p.substr(1, p.size() - 2);
    }
    if (parts.size() == 1 && parts[0].empty()) parts.clear();
    return parts;
  }

  std::vector<double> numbers(const std::string& sec, const std::string& key) {
    std::vector<double> out;
    for (const auto& p : list(sec, key)) {
      try {
        out.push_back(boost::lexical_cast<double>(p));
      } catch (const boost::bad_lexical_cast&) {
        fail(sec, key, "expected a list of numbers, got '" + p + "'");
      }
    }
    return out;
  }

  void complex(const std::string& sec, const std::string& key, cplx& out) {
    if (!has(sec, key)) return;
    const auto v = numbers(sec, key);
    if (v.empty() || v.size() > 2) fail(sec, key, "expected 're' or 're, im'");
    out = {v[0], v.size() > 1 ? v[1] : 0.0};
  }

  /// Rejects keys that no reader consumed.
  void check_unused() const {
    for (const auto& [sec, node] : t_.tree)
      for (const auto& [key, val] : node)
        if (!used_.count(sec + "." + key)) fail(sec, key, "unknown key");
  }

 private:
  const ConfigTree& t_;
  std::set<std::string> used_;
};

int dof_index(const std::string& name) {
  for (int d = 0; d < kDofCount; ++d)
    if (name == kDofNames[size_t(d)]) return d;
  return -1;
}

void read_oscillator(Reader& r, const std::string& sec, OscillatorMode& m) {
  r.integer(sec, "mirror", m.mirror);
  r.text(sec, "label", m.label);
  r.num(sec, "mass", m.mass);
  r.num(sec, "omega0", m.omega0);
  r.num(sec, "gamma", m.gamma);
  if (m.mirror != 1 && m.mirror != 2) r.fail(sec, "mirror", "must be 1 or 2");
}

}  // namespace

ConfigTree read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  return read_stream(in, path);
}

ConfigTree read_config_string(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  return read_stream(in, source);
}

void set_value(ConfigTree& t, const std::string& section, const std::string& key,
               const std::string& value) {
  auto it = t.tree.find(section);
  pt::ptree& node = it == t.tree.not_found() ? t.tree.push_back({section, pt::ptree()})->second : it->second;
  node.put_child(pt::ptree::path_type(key, '\0'), pt::ptree(value));
}

RunConfig parse_config(const ConfigTree& t) {
  Reader r(t);
  RunConfig c;
  c.source = t.source;
  c.hash = fnv1a(canonical(t.tree));

  r.text("run", "command", c.command);
  r.integer("run", "n_max", c.n_max);
  r.flag("run", "check_convergence", c.check_convergence);
  r.integer("run", "threads", c.threads);
  r.num("run", "omega", c.omega);
  if (c.n_max < 0) r.fail("run", "n_max", "must be non-negative");

  auto& cav = c.cavity;
  r.num("cavity", "length", cav.L);
  r.num("cavity", "R1", cav.R1);
  r.num("cavity", "R2", cav.R2);
  r.num("cavity", "spot", c.spot);
  r.num("cavity", "lambda", cav.lambda);
  r.num("cavity", "finesse", c.finesse);
  if (r.has("cavity", "finesse_convention")) {
    const std::string v = r.raw("cavity", "finesse_convention");
    if (v == "log")
      c.finesse_convention = FinesseConvention::log;
    else if (v == "standard")
      c.finesse_convention = FinesseConvention::standard;
    else
      r.fail("cavity", "finesse_convention", "expected log or standard, got '" + v + "'");
  }
  r.num("cavity", "absorption", c.absorption);
  r.num("cavity", "r1", cav.r1);
  r.num("cavity", "t1", cav.t1);
  r.num("cavity", "r2", cav.r2);
  r.num("cavity", "t2", cav.t2);
  r.num("cavity", "A1", cav.A1);
  r.num("cavity", "A2", cav.A2);
  r.num("cavity", "psi", cav.psi);
  if (r.has("cavity", "psi_units")) {
    const std::string v = r.raw("cavity", "psi_units");
    if (v == "linewidth")
      c.psi_in_linewidths = true;
    else if (v != "rad")
      r.fail("cavity", "psi_units", "expected rad or linewidth, got '" + v + "'");
  }
  r.num("cavity", "power", cav.power);
  if (c.spot < 0.0) r.fail("cavity", "spot", "must be positive");
  if (c.psi_in_linewidths && !(c.finesse > 0.0))
    r.fail("cavity", "psi_units", "linewidth units need cavity.finesse");

  if (r.has("modulation", "frequency")) {
    if (r.raw("modulation", "frequency") == "auto")
      c.mod_freq_auto = true;
    else
      r.num("modulation", "frequency", cav.mod_freq);
  }
  r.num("modulation", "depth", cav.mod_depth);
  r.integer("modulation", "p_max", cav.p_max);
  r.num("modulation", "bessel_cutoff", cav.bessel_cutoff);
  r.integer("modulation", "demod_k", cav.demod_k);
  r.num("modulation", "demod_phase", cav.demod_phase);

  r.num("beam", "theta_y", c.beam.theta_y);
  r.num("beam", "theta_z", c.beam.theta_z);
  r.num("beam", "eps_y", c.beam.eps_y);
  r.num("beam", "eps_z", c.beam.eps_z);

  r.flag("langevin", "freeze_suspensions", c.langevin.freeze_suspensions);
  r.flag("langevin", "levin_mirrors", c.langevin.levin_mirrors);
  r.flag("langevin", "axial_theta_shot_pairing", c.langevin.axial_theta_shot_pairing);
  r.num("langevin", "radiation_sign", c.langevin.radiation_sign);
  if (r.has("langevin", "quadrature")) {
    const std::string v = r.raw("langevin", "quadrature");
    if (v == "Y")
      c.langevin.quad = MechQuadrature::Y;
    else if (v != "X")
      r.fail("langevin", "quadrature", "expected X or Y");
  }

  auto& nz = c.noise;
  if (r.has("noise", "thermal_model")) {
    try {
      nz.thermal.kind = parse_thermal_model(r.raw("noise", "thermal_model"));
    } catch (const ConfigError& e) {
      r.fail("noise", "thermal_model", e.what());
    }
  }
  r.num("noise", "temperature", nz.thermal.temperature);
  r.flag("noise", "include_eta", nz.thermal.include_eta);
  r.num("noise", "rin_psd", nz.rin_psd);
  r.flag("noise", "thermal", nz.thermal_on);
  r.flag("noise", "shot", nz.shot_on);
  if (r.has("noise", "shot_normalization")) {
    const std::string v = r.raw("noise", "shot_normalization");
    if (v == "port_ratio")
      nz.shot_norm = ShotNormalization::port_ratio;
    else if (v != "physical")
      r.fail("noise", "shot_normalization", "expected physical or port_ratio");
  }
  for (auto& m : nz.material) {
    r.num("noise", "young", m.young);
    r.num("noise", "poisson", m.poisson);
    r.num("noise", "loss_angle", m.loss_angle);
  }
  r.num("noise", "illumination1", nz.illumination[0]);
  r.num("noise", "illumination2", nz.illumination[1]);

  r.flag("levin", "mirror1", c.levin[0]);
  r.flag("levin", "mirror2", c.levin[1]);
  r.complex("servo", "dp_gain", c.dp_gain);
  r.complex("servo", "qd_y_gain", c.qd_gain[0]);
  r.complex("servo", "qd_z_gain", c.qd_gain[1]);

  for (const auto& [sec, node] : t.tree) {
    if (boost::starts_with(sec, "suspension.")) {
      OscillatorMode m;
      m.label = sec.substr(11);
      read_oscillator(r, sec, m);
      for (int d = 0; d < kDofCount; ++d)
        r.num(sec, std::string("K_") + kDofNames[size_t(d)], m.K[size_t(d)]);
      if (r.has(sec, "dof")) {
        const int d = dof_index(r.raw(sec, "dof"));
        if (d < 0) r.fail(sec, "dof", "expected one of psi, psi_y, psi_z, theta_y, theta_z");
        m.K[size_t(d)] = 1.0;
      }
      try {
        m.validate();
      } catch (const ConfigError& e) {
        r.fail(sec, "mass", e.what());
      }
      c.suspension.push_back(m);
    } else if (boost::starts_with(sec, "mirror_mode.")) {
      MirrorModeSpec m;
      m.name = sec.substr(12);
      m.oscillator.label = "mirror-internal";
      read_oscillator(r, sec, m.oscillator);
      r.num(sec, "piston", m.piston);
      r.num(sec, "tilt_y", m.tilt_y);
      r.num(sec, "tilt_z", m.tilt_z);
      r.num(sec, "levin", m.levin);
      c.mirror_modes.push_back(m);
    }
  }

  if (r.has("pair", "modes")) {
    const auto names = r.list("pair", "modes");
    if (names.size() != 2) r.fail("pair", "modes", "expected two mirror-mode names");
    for (int j = 0; j < 2; ++j) {
      auto it = std::find_if(c.mirror_modes.begin(), c.mirror_modes.end(),
                             [&](const MirrorModeSpec& m) { return m.name == names[size_t(j)]; });
      if (it == c.mirror_modes.end()) r.fail("pair", "modes", "no mirror_mode." + names[size_t(j)]);
      c.pair[size_t(j)] = int(it - c.mirror_modes.begin());
    }
  }
  r.num("pair", "max_detuning", c.max_detuning);
  r.num("pair", "response_scale", c.response_scale);
  r.num("pair", "homodyne_angle", c.homodyne_angle);
  if (r.has("pair", "homodyne_mode")) {
    const auto v = r.numbers("pair", "homodyne_mode");
    if (v.size() != 2) r.fail("pair", "homodyne_mode", "expected 'ly, lz'");
    c.homodyne_mode = {int(v[0]), int(v[1])};
  }

  const auto& vocab = sweep_parameters();
  auto known = [&](const std::string& p) { return std::find(vocab.begin(), vocab.end(), p) != vocab.end(); };
  r.text("sweep", "param", c.sweep.param);
  r.num("sweep", "min", c.sweep.min);
  r.num("sweep", "max", c.sweep.max);
  r.integer("sweep", "count", c.sweep.count);
  if (r.has("sweep", "scale")) {
    const std::string v = r.raw("sweep", "scale");
    if (v == "log")
      c.sweep.scale = SweepScale::log;
    else if (v != "linear")
      r.fail("sweep", "scale", "expected linear or log");
  }
  if (!c.sweep.param.empty()) {
    if (!known(c.sweep.param)) r.fail("sweep", "param", "unknown sweep parameter '" + c.sweep.param + "'");
    if (c.sweep.count < 1) r.fail("sweep", "count", "must be at least 1");
    if (c.sweep.scale == SweepScale::log && !(c.sweep.min > 0.0 && c.sweep.max > 0.0))
      r.fail("sweep", "scale", "log sweeps need positive bounds");
  }
  r.text("series", "param", c.series.param);
  if (r.has("series", "values")) c.series.values = r.numbers("series", "values");
  if (!c.series.param.empty()) {
    if (!known(c.series.param)) r.fail("series", "param", "unknown series parameter '" + c.series.param + "'");
    if (c.series.param == c.sweep.param) r.fail("series", "param", "must differ from sweep.param");
    if (c.series.values.empty()) r.fail("series", "values", "must list at least one value");
  }

  r.check_unused();
  return c;
}

double concentric_radius(double L, double w, double lambda) {
  // symmetric cavity: w_std² = (λL/π)/sqrt(1 − g²) with w_std² = 2w²
  const double x = lambda * L / (2.0 * phys::pi * w * w);
  if (!(x < 1.0)) throw ConfigError("cavity.spot is too small for this length");
  const double g = -std::sqrt(1.0 - x * x);
  return L / (1.0 - g);
}

RunConfig apply(const RunConfig& base, const PointValues& p) {
  RunConfig c = base;
  for (const auto& [name, v] : p.overrides) {
    if (name == "L") c.cavity.L = v;
    else if (name == "psi") c.cavity.psi = v;
    else if (name == "omega") c.omega = v;
    else if (name == "theta_y") c.beam.theta_y = v;
    else if (name == "theta_z") c.beam.theta_z = v;
    else if (name == "eps_y") c.beam.eps_y = v;
    else if (name == "eps_z") c.beam.eps_z = v;
    else if (name == "power") c.cavity.power = v;
    else if (name == "finesse") c.finesse = v;
    else if (name == "spot") c.spot = v;
    else if (name == "demod_phase") c.cavity.demod_phase = v;
    else if (name == "mod_depth") c.cavity.mod_depth = v;
    else if (name == "temperature") c.noise.thermal.temperature = v;
    else throw ConfigError("unknown sweep parameter '" + name + "'");
  }
  return c;
}

CavityConfig resolve_cavity(const RunConfig& cfg) {
  CavityConfig c = cfg.cavity;
  if (cfg.spot > 0.0) {
    const double R = concentric_radius(c.L, cfg.spot, c.lambda);
    c.R1 = -R;
    c.R2 = R;
  }
  if (cfg.finesse > 0.0) {
    const auto [r, t] = mirror_from_finesse(cfg.finesse, cfg.finesse_convention, cfg.absorption);
    c.r1 = c.r2 = r;
    c.t1 = c.t2 = t;
    c.A1 = c.A2 = cfg.absorption;
  }
  if (cfg.psi_in_linewidths) c.psi *= phys::pi / cfg.finesse;
  if (cfg.mod_freq_auto) {
    const double w = cfg.spot > 0.0 ? cfg.spot : derive_geometry(c).w1;
    c.mod_freq = 2.0 * phys::c * c.lambda / (phys::pi * w * w);
  }
  c.validate();
  return c;
}

ModeVector resolve_input(const RunConfig& cfg, const Cavity& cav) {
  InputBeam b = matched_beam(cav.config().R1, cav.geometry().w1, cav.geometry().k);
  b.theta_y = cfg.beam.theta_y;
  b.theta_z = cfg.beam.theta_z;
  b.eps_y = cfg.beam.eps_y;
  b.eps_z = cfg.beam.eps_z;
  return input_vector(cav.basis(), b);
}

namespace {

ModeMatrix mirror_profile(const MirrorModeSpec& m, const Cavity& cav) {
  const int d = cav.basis().dim();
  const double k = cav.geometry().k;
  const double w = m.oscillator.mirror == 1 ? cav.geometry().w1 : cav.geometry().w2;
  ModeMatrix p = m.piston * 2.0 * k * ModeMatrix::Identity(d, d);
  if (m.tilt_y != 0.0) p += m.tilt_y * k * cav.quadratures().Xy;
  if (m.tilt_z != 0.0) p += m.tilt_z * k * cav.quadratures().Xz;
  if (m.levin != 0.0) p += m.levin * levin_profile(cav.basis(), w, k);
  return p;
}

}  // namespace

MechanicsModel resolve_mechanics(const RunConfig& cfg, const Cavity& cav) {
  MechanicsModel m;
  m.suspension = cfg.suspension;
  for (const auto& mm : cfg.mirror_modes)
    m.mirror_modes.push_back({mm.name, mirror_profile(mm, cav), mm.oscillator});
  for (int J = 0; J < 2; ++J)
    if (cfg.levin[size_t(J)] || cfg.langevin.levin_mirrors) {
      const double w = J == 0 ? cav.geometry().w1 : cav.geometry().w2;
      m.levin[size_t(J)] = levin_profile(cav.basis(), w, cav.geometry().k);
    }
  if (cfg.dp_gain != 0.0) m.servos.dp = ServoTF::constant(cfg.dp_gain);
  for (int q = 0; q < 2; ++q)
    if (cfg.qd_gain[size_t(q)] != 0.0) m.servos.qd[size_t(q)] = ServoTF::constant(cfg.qd_gain[size_t(q)]);
  return m;
}

BipartiteConfig resolve_pair(const RunConfig& cfg, const Cavity& cav) {
  if (cfg.mirror_modes.size() < 2) throw ConfigError("pair: needs two [mirror_mode.*] sections");
  BipartiteConfig b;
  for (int j = 0; j < 2; ++j) {
    const auto& mm = cfg.mirror_modes.at(size_t(cfg.pair[size_t(j)]));
    b.modes[size_t(j)] = {mm.name, mirror_profile(mm, cav), mm.oscillator};
  }
  b.radiation_sign = cfg.langevin.radiation_sign;
  b.max_detuning = cfg.max_detuning;
  b.validate();
  return b;
}

BipartiteNoise resolve_pair_noise(const RunConfig& cfg) {
  BipartiteNoise n;
  n.thermal = cfg.noise.thermal;
  n.thermal_on = cfg.noise.thermal_on;
  n.shot_on = cfg.noise.shot_on;
  n.response_scale = cfg.response_scale;
  return n;
}

}  // namespace fpcav::app
