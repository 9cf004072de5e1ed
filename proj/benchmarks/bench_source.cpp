#include <benchmark/benchmark.h>

#include "qrng/entropy.hpp"
#include "qrng/source_sim.hpp"

namespace {

void BM_SimulateBlock(benchmark::State& state) {
  qrng::SourceConfig cfg;
  const auto count = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(qrng::simulate_block(cfg, count));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateBlock)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

void BM_EstimateCovariance(benchmark::State& state) {
  qrng::SourceConfig cfg;
  const auto block = qrng::simulate_block(cfg, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(qrng::estimate_covariance(block, cfg.classical_var_x, cfg.classical_var_p));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EstimateCovariance)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

void BM_Psd(benchmark::State& state) {
  qrng::SourceConfig cfg;
  const auto block = qrng::simulate_block(cfg, 1 << 20);
  const auto seg = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(qrng::estimate_psd(block, seg));
}
BENCHMARK(BM_Psd)->Arg(1024)->Arg(8192)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
