#pragma once

#include <map>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "fpcav/bipartite.hpp"

namespace fpcav::app {

enum class SweepScale { linear, log };

/// Sweep axis; an empty `param` means a single evaluation.
struct SweepSpec {
  std::string param;
  double min = 0.0;
  double max = 0.0;
  int count = 1;
  SweepScale scale = SweepScale::linear;

  std::vector<double> values() const;
};

/// Optional outer list of values for a second parameter (one curve per value).
struct SeriesSpec {
  std::string param;
  std::vector<double> values;
};

/// Surface profile of a mirror mode as a weighted sum of shapes, each carrying 2k.
struct MirrorModeSpec {
  std::string name;
  OscillatorMode oscillator;
  double piston = 1.0;  // uniform displacement
  double tilt_y = 0.0;  // weight of the X_y tilt quadrature
  double tilt_z = 0.0;
  double levin = 0.0;   // weight of the Gaussian-load deformation
};

struct RunConfig {
  std::string command;  // default subcommand for the preset
  CavityConfig cavity;
  double spot = 0.0;        // m, > 0 derives R1 = −R2 symmetric near-concentric from L
  double finesse = 0.0;     // > 0 derives r, t for both mirrors
  FinesseConvention finesse_convention = FinesseConvention::log;
  double absorption = 0.0;  // per mirror, used with `finesse`
  bool psi_in_linewidths = false;  // ψ given in units of π/𝓕
  bool mod_freq_auto = false;      // Λ = 2cλ/(π w²) with w the mirror-1 spot

  InputBeam beam;  // tilts and offsets only; curvature is matched to the cavity

  std::vector<OscillatorMode> suspension;
  std::vector<MirrorModeSpec> mirror_modes;
  std::array<bool, 2> levin{false, false};
  cplx dp_gain{0.0, 0.0};
  std::array<cplx, 2> qd_gain{};
  LangevinOptions langevin;
  NoiseOptions noise;

  std::array<int, 2> pair{0, 1};  // mirror_modes indices used by entangle/squeeze
  double max_detuning = 10.0;
  double response_scale = 1.0;
  ModeIndex homodyne_mode;
  double homodyne_angle = 0.0;  // rad

  int n_max = 6;
  bool check_convergence = false;
  int threads = 0;       // 0: hardware concurrency
  double omega = 0.0;    // rad/s, frequency when not swept
  SweepSpec sweep;
  SeriesSpec series;

  std::string hash;      // FNV-1a of the canonical key-value dump
  std::string source;    // file name or "<string>"
};

/// Documented sweep/series vocabulary.
const std::vector<std::string>& sweep_parameters();

/// Key-value tree with line numbers for diagnostics.
struct ConfigTree {
  boost::property_tree::ptree tree;
  std::map<std::string, int> lines;  // "section.key" -> line
  std::string source;
};

ConfigTree read_config_file(const std::string& path);
ConfigTree read_config_string(const std::string& text, const std::string& source = "<string>");
/// Sets "section.key" (created when missing), used for command-line overrides.
void set_value(ConfigTree& t, const std::string& section, const std::string& key,
               const std::string& value);
/// Interprets the tree; throws ConfigError naming the offending field and line.
RunConfig parse_config(const ConfigTree& t);

/// Cavity settings at one point, with the sweep and series values applied.
struct PointValues {
  std::vector<std::pair<std::string, double>> overrides;
};
RunConfig apply(const RunConfig& base, const PointValues& p);

/// Concrete cavity configuration: derived R, r/t, ψ units and Λ resolved.
CavityConfig resolve_cavity(const RunConfig& cfg);
/// Input vector on the cavity basis.
ModeVector resolve_input(const RunConfig& cfg, const Cavity& cav);
MechanicsModel resolve_mechanics(const RunConfig& cfg, const Cavity& cav);
BipartiteConfig resolve_pair(const RunConfig& cfg, const Cavity& cav);
BipartiteNoise resolve_pair_noise(const RunConfig& cfg);

/// Symmetric near-concentric radius giving spot w (u ∝ exp(−r²/2w²)) on both mirrors.
double concentric_radius(double L, double w, double lambda);

}  // namespace fpcav::app
