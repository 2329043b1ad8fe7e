// Serial references against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "qkd/bb84_engine.hpp"
#include "qkd/flux_optimizer.hpp"
#include "qkd/privacy_amplification.hpp"

namespace {

using namespace qkd;

const std::vector<double>& curve_lengths() {
  static const std::vector<double> v = lin_range(0.0, 60.0, 0.5);
  return v;
}

void BM_RateCurveSerial(benchmark::State& state) {
  const ModelParams params;
  for (auto _ : state) benchmark::DoNotOptimize(rate_curve_serial(curve_lengths(), params));
}

void BM_RateCurveParallel(benchmark::State& state) {
  const ModelParams params;
  for (auto _ : state) benchmark::DoNotOptimize(rate_curve(curve_lengths(), params));
}

void BM_ContourSerial(benchmark::State& state) {
  const ModelParams params;
  const auto mu = log_space(1e-4, 1.0, static_cast<std::size_t>(state.range(0)));
  const auto len = lin_range(0.0, 60.0, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(contour_grid_serial(mu, len, params));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(mu.size() * len.size()));
}

void BM_ContourParallel(benchmark::State& state) {
  const ModelParams params;
  const auto mu = log_space(1e-4, 1.0, static_cast<std::size_t>(state.range(0)));
  const auto len = lin_range(0.0, 60.0, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(contour_grid(mu, len, params));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(mu.size() * len.size()));
}

SimConfig session_config(int64_t pulses) {
  SimConfig c;
  c.link = reference_link(10.0, 0.0174);
  c.n_pulses = static_cast<std::uint64_t>(pulses);
  return c;
}

void BM_SessionSerial(benchmark::State& state) {
  const SimConfig c = session_config(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_session_serial(c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SessionParallel(benchmark::State& state) {
  const SimConfig c = session_config(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_session(c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BitString bench_key(int64_t n) {
  Engine eng = make_engine(3);
  return BitString::random(static_cast<std::size_t>(n), eng);
}

void BM_ToeplitzSerial(benchmark::State& state) {
  const BitString key = bench_key(state.range(0));
  const auto m = static_cast<std::size_t>(state.range(0) / 2);
  for (auto _ : state) benchmark::DoNotOptimize(toeplitz_hash_serial(key, m, 1));
}

void BM_ToeplitzParallel(benchmark::State& state) {
  const BitString key = bench_key(state.range(0));
  const auto m = static_cast<std::size_t>(state.range(0) / 2);
  for (auto _ : state) benchmark::DoNotOptimize(toeplitz_hash(key, m, 1));
}

}  // namespace

BENCHMARK(BM_RateCurveSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RateCurveParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ContourSerial)->Arg(121)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ContourParallel)->Arg(121)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SessionSerial)->Arg(1 << 22)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SessionParallel)->Arg(1 << 22)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ToeplitzSerial)->Arg(1 << 12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ToeplitzParallel)->Arg(1 << 12)->Arg(1 << 16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
