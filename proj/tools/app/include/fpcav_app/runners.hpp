#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fpcav_app/config.hpp"
#include "fpcav_app/table.hpp"

namespace fpcav::app {

enum class Command { stiffness, dp_static, dp_coeffs, spectrum, entangle, squeeze, modes_info };

/// Accepts the subcommand spelling (dp-static, modes-info, ...).
Command parse_command(const std::string& name);
const char* to_string(Command c);

struct RunResult {
  Table table;
  int singular_points = 0;
  bool convergence_checked = false;
  double max_convergence_delta = 0.0;  // max |Δ| on the primary columns over the largest primary |result| of the series
};

/// Evaluates the (series × sweep) grid on a worker pool; rows keep the grid order.
RunResult run(Command cmd, const RunConfig& cfg);

/// Per-point evaluation at a chosen truncation, exposed for convergence studies.
struct Evaluator {
  std::vector<std::string> columns;
  std::vector<int> primary;  // columns compared in the convergence report
  std::function<std::vector<double>(const RunConfig& point, int n_max)> eval;
};
Evaluator make_evaluator(Command cmd, const RunConfig& cfg);

/// Grid points in output order: series value outermost, then sweep value.
std::vector<PointValues> grid(const RunConfig& cfg);

/// Runs f(i) for i in [0, n) on `threads` workers (0: hardware concurrency).
void parallel_for(int n, int threads, const std::function<void(int)>& f);

}  // namespace fpcav::app
