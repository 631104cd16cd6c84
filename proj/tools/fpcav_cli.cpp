#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "fpcav/errors.hpp"
#include "fpcav_app/runners.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kSingular = 3 };

struct Options {
  std::string config;
  std::string out;
  int n_max = -1;
  int threads = -1;
  bool check_convergence = false;
  std::string finesse_convention;
  bool freeze_suspensions = false;
  bool levin_mirrors = false;
  std::string thermal_model;
};

int execute(fpcav::app::Command cmd, const Options& o) {
  using namespace fpcav::app;
  ConfigTree tree = read_config_file(o.config);
  if (o.n_max >= 0) set_value(tree, "run", "n_max", std::to_string(o.n_max));
  if (o.threads >= 0) set_value(tree, "run", "threads", std::to_string(o.threads));
  if (o.check_convergence) set_value(tree, "run", "check_convergence", "true");
  if (!o.finesse_convention.empty()) set_value(tree, "cavity", "finesse_convention", o.finesse_convention);
  if (o.freeze_suspensions) set_value(tree, "langevin", "freeze_suspensions", "true");
  if (o.levin_mirrors) set_value(tree, "langevin", "levin_mirrors", "true");
  if (!o.thermal_model.empty()) set_value(tree, "noise", "thermal_model", o.thermal_model);
  const RunConfig cfg = parse_config(tree);

  const RunResult r = run(cmd, cfg);
  if (o.out.empty() || o.out == "-") {
    r.table.write(std::cout);
  } else {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw fpcav::ConfigError(o.out + ": cannot open output file");
    r.table.write(f);
  }
  if (r.convergence_checked)
    std::cerr << "convergence: max relative delta " << format_number(r.max_convergence_delta) << "\n";
  if (r.singular_points > 0) {
    std::cerr << r.singular_points << " sweep point(s) flagged singular\n";
    return kSingular;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  using fpcav::app::Command;
  CLI::App app{"Misaligned, detuned Fabry-Perot cavity simulator"};
  app.require_subcommand(1);
  Options o;

  const std::vector<std::pair<Command, std::string>> commands{
      {Command::stiffness, "Optical stiffness coefficients"},
      {Command::dp_static, "Static Drever-Pound and quadrant signals"},
      {Command::dp_coeffs, "Drever-Pound response coefficients"},
      {Command::spectrum, "Closed-loop noise spectra of every observable"},
      {Command::entangle, "Two-mode entanglement measure and squeezing"},
      {Command::squeeze, "Ponderomotive squeezing of the reflected field"},
      {Command::modes_info, "Mode basis, ordering and derived geometry"},
  };
  for (const auto& [cmd, help] : commands) {
    CLI::App* sub = app.add_subcommand(fpcav::app::to_string(cmd), help);
    sub->add_option("--config", o.config, "Configuration file (key = value sections)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Output CSV path, '-' for stdout");
    sub->add_option("--n-max", o.n_max, "Highest transverse order")->check(CLI::NonNegativeNumber);
    sub->add_option("--threads", o.threads, "Worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
    sub->add_flag("--check-convergence", o.check_convergence, "Compare every point against n_max + 2");
    sub->add_option("--finesse-convention", o.finesse_convention, "Finesse to mirror mapping")
        ->check(CLI::IsMember({"log", "standard"}));
    sub->add_flag("--freeze-suspensions", o.freeze_suspensions, "Drop the suspension equations");
    sub->add_flag("--levin-mirrors", o.levin_mirrors, "Replace mirror modes by Levin sources");
    sub->add_option("--thermal-model", o.thermal_model, "Thermal correlation model")
        ->check(CLI::IsMember({"brownian", "diosi", "gv"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  for (const auto& [cmd, help] : commands) {
    if (!app.got_subcommand(fpcav::app::to_string(cmd))) continue;
    try {
      return execute(cmd, o);
    } catch (const fpcav::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kConfigError;
    } catch (const fpcav::SingularityError& e) {
      std::cerr << "numerical singularity: " << e.what() << "\n";
      return kSingular;
    } catch (const fpcav::ConvergenceError& e) {
      std::cerr << "numerical singularity: " << e.what() << "\n";
      return kSingular;
    }
  }
  return kConfigError;
}
