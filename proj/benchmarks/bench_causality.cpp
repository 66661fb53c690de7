#include <benchmark/benchmark.h>

#include <random>

#include "causalop/fft.hpp"
#include "causalop/harness.hpp"

using namespace causalop;

namespace {

struct Fixture {
  ops::CausalityModel model;
  std::vector<double> signal;

  explicit Fixture(std::size_t m) {
    model = std::get<ops::CausalityModel>(harness::build_model({}, m, 0.02, 42));
    std::mt19937_64 rng(7);
    std::normal_distribution<double> d(0.0, 0.1);
    signal.resize(m);
    for (double& v : signal) v = d(rng);
  }
};

void forward_all(benchmark::State& state, bool fast) {
  const Fixture f(std::size_t(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ops::causality_forward_all(f.model, f.signal, fast));
  state.SetComplexityN(state.range(0));
}

void BM_CausalityDirect(benchmark::State& state) { forward_all(state, false); }
void BM_CausalityFft(benchmark::State& state) { forward_all(state, true); }

void BM_Correlate(benchmark::State& state) {
  const std::size_t m = std::size_t(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d;
  std::vector<double> w(m), u(m);
  for (std::size_t i = 0; i < m; ++i) w[i] = d(rng), u[i] = d(rng);
  for (auto _ : state) benchmark::DoNotOptimize(fft::correlate(w, u));
}

}  // namespace

BENCHMARK(BM_CausalityDirect)->RangeMultiplier(2)->Range(256, 4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CausalityFft)->RangeMultiplier(2)->Range(256, 4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Correlate)->RangeMultiplier(4)->Range(256, 16384);

BENCHMARK_MAIN();
