// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <numbers>

#include "spinxfer/ptz.hpp"
#include "spinxfer/restoring.hpp"

using namespace spinxfer;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::Parallel : Exec::Serial; }

CouplingMatrix zigzag_couplings(int n) {
  return coupling_matrix(build_geometry({GeometryKind::Zigzag, n, 1.3, std::numbers::pi / 2}),
                         CouplingMode::AngularDipolar);
}

void BM_BuildBlocks(benchmark::State& st) {
  const auto d = zigzag_couplings(16);
  const auto basis = excitation_basis(16, 4);
  for (auto _ : st) benchmark::DoNotOptimize(build_blocks(d, {}, basis, exec_of(st)));
}

void BM_Spectrum(benchmark::State& st) {
  const auto h = build_blocks(zigzag_couplings(14), {}, excitation_basis(14, 3));
  for (auto _ : st) benchmark::DoNotOptimize(SpectralHamiltonian(h, -1, exec_of(st)));
}

void BM_SolveControls(benchmark::State& st) {
  const auto d = coupling_matrix(build_geometry({GeometryKind::Linear, 6}), CouplingMode::IsotropicDipolar);
  const SpectralHamiltonian h(build_blocks(d, {}, excitation_basis(6, 1)));
  RestoreOptions o;
  o.trials = 16;
  o.trotter = 20;
  o.exec = exec_of(st);
  for (auto _ : st) benchmark::DoNotOptimize(solve_controls(h, Partition::make(6, 2), 20.0, o));
}

void BM_OptimizeTau(benchmark::State& st) {
  const SpectralHamiltonian h(build_blocks(zigzag_couplings(9), {}, excitation_basis(9, 3)));
  std::vector<double> taus;
  for (double t = 0.0; t <= 100.0; t += 2.0) taus.push_back(t);
  for (auto _ : st)
    benchmark::DoNotOptimize(
        optimize_tau(h, Partition::make(9, 3), PtzProtocol::Full, taus, CutOptions{}, false, exec_of(st)));
}

}  // namespace

BENCHMARK(BM_BuildBlocks)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Spectrum)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveControls)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OptimizeTau)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
