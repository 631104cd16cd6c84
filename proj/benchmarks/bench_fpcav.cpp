#include <benchmark/benchmark.h>

#include "fpcav/bipartite.hpp"
#include "fpcav/forces.hpp"
#include "fpcav/signals.hpp"
#include "fpcav_app/runners.hpp"

using namespace fpcav;

namespace {

CavityConfig symmetric(double psi) {
  CavityConfig c;
  c.L = 0.05;
  c.R1 = -0.08;
  c.R2 = 0.08;
  auto [r, t] = mirror_from_finesse(300, FinesseConvention::log);
  c.r1 = c.r2 = r;
  c.t1 = c.t2 = t;
  c.psi = psi;
  c.mod_depth = 0.1;
  c.mod_freq = 4e7;
  return c;
}

ModeVector tilted(const Cavity& cav) {
  InputBeam b = matched_beam(cav.config().R1, cav.geometry().w1, cav.geometry().k);
  b.theta_y = 1e-5;
  b.theta_z = 2e-5;
  return input_vector(cav.basis(), b);
}

app::RunConfig preset(const std::string& name) {
  return app::parse_config(app::read_config_file(std::string(FPCAV_PRESET_DIR) + "/" + name));
}

void BM_CavitySetup(benchmark::State& st) {
  const int n = int(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(Cavity(symmetric(0.003), n));
}

void BM_Green(benchmark::State& st) {
  const Cavity cav(symmetric(0.003), int(st.range(0)));
  double w = 0.0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(cav.green(1, w));
    w += 1.0;
  }
}

void BM_InputVector(benchmark::State& st) {
  const Cavity cav(symmetric(0.003), int(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(tilted(cav));
}

void BM_Stiffness(benchmark::State& st) {
  const Cavity cav(symmetric(0.003), int(st.range(0)));
  const ModeVector v = tilted(cav);
  for (auto _ : st) benchmark::DoNotOptimize(stiffness(cav, v, 0.0));
}

void BM_DPStatic(benchmark::State& st) {
  const Cavity cav(symmetric(0.003), int(st.range(0)));
  const ModeVector v = tilted(cav);
  for (auto _ : st) benchmark::DoNotOptimize(dp_static(cav, v));
}

void BM_PresetPoint(benchmark::State& st, app::Command cmd, const std::string& name) {
  const app::RunConfig cfg = preset(name);
  const app::Evaluator ev = app::make_evaluator(cmd, cfg);
  const auto points = app::grid(cfg);
  const app::RunConfig at = app::apply(cfg, points[points.size() / 2]);
  for (auto _ : st) benchmark::DoNotOptimize(ev.eval(at, cfg.n_max));
}

void BM_Entanglement(benchmark::State& st) {
  const app::RunConfig cfg = preset("entangle.ini");
  const Cavity cav(app::resolve_cavity(cfg), cfg.n_max);
  const ModeVector v = app::resolve_input(cfg, cav);
  const BipartiteConfig pair = app::resolve_pair(cfg, cav);
  const BipartiteNoise noise = app::resolve_pair_noise(cfg);
  for (auto _ : st) benchmark::DoNotOptimize(entanglement(cav, v, pair, noise, 2.0001e5));
}

}  // namespace

BENCHMARK(BM_CavitySetup)->Arg(2)->Arg(6)->Arg(8)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Green)->Arg(2)->Arg(6)->Arg(8)->Unit(benchmark::kNanosecond);
BENCHMARK(BM_InputVector)->Arg(2)->Arg(6)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Stiffness)->Arg(2)->Arg(6)->Arg(8)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DPStatic)->Arg(2)->Arg(6)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_PresetPoint, stiffness, app::Command::stiffness, "stiffness_length.ini")
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_PresetPoint, dp_coeffs, app::Command::dp_coeffs, "dp_coeffs_length.ini")
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_PresetPoint, spectrum, app::Command::spectrum, "spectrum.ini")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Entanglement)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
