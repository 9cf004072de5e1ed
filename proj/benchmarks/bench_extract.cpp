#include <random>

#include <benchmark/benchmark.h>

#include "qrng/bitstream.hpp"
#include "qrng/nist_tests.hpp"
#include "qrng/toeplitz.hpp"

namespace {

qrng::BitStream random_bits(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  qrng::BitStream out;
  out.reserve(count);
  while (out.size() < count) {
    const auto take = static_cast<unsigned>(std::min<std::size_t>(64, count - out.size()));
    out.append_bits(rng(), take);
  }
  return out;
}

void BM_ExtractBlock(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = n * 6 / 10;
  const qrng::ToeplitzExtractor ex(qrng::ToeplitzSeed(random_bits(m + n - 1, 1), m, n));
  const auto input = random_bits(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ex.extract_block(input));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_ExtractBlock)->Arg(1024)->Arg(4096)->Arg(16384);

void BM_ExtractStream(benchmark::State& state) {
  const std::size_t n = 4096;
  const std::size_t m = 2512;
  const qrng::ToeplitzExtractor ex(qrng::ToeplitzSeed(random_bits(m + n - 1, 3), m, n));
  const auto raw = random_bits(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(ex.extract_stream(raw, 0.6135));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ExtractStream)->Arg(1 << 24)->Unit(benchmark::kMillisecond);

void BM_Battery(benchmark::State& state) {
  const auto bits = random_bits(static_cast<std::size_t>(state.range(0)), 5);
  const qrng::nist::BatteryConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(qrng::nist::run_battery(bits, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Battery)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

}  // namespace
