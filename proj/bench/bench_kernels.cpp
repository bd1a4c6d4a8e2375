// Parallel kernels against their serial and naive references, plus whole-split
// evaluation with and without the OpenMP graph loop.

#include <benchmark/benchmark.h>

#include <random>

#include "roadbeh/kernels.hpp"
#include "roadbeh/synth.hpp"
#include "roadbeh/train.hpp"

namespace {

using namespace roadbeh;

using Gemm = void (*)(std::size_t, std::size_t, std::size_t, std::span<const double>, std::span<const double>,
                      std::span<double>);

std::vector<double> random_vec(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

void run_gemm(benchmark::State& state, Gemm gemm) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto n = static_cast<std::size_t>(state.range(2));
  const auto a = random_vec(m * k, 1), b = random_vec(k * n, 2);
  std::vector<double> c(m * n);
  for (auto _ : state) {
    gemm(m, n, k, a, b, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.counters["flops"] = benchmark::Counter(2.0 * m * n * k, benchmark::Counter::kIsIterationInvariantRate);
}

void BM_gemm_parallel(benchmark::State& s) { run_gemm(s, kernels::gemm_nn); }
void BM_gemm_serial(benchmark::State& s) { run_gemm(s, kernels::serial::gemm_nn); }
void BM_gemm_reference(benchmark::State& s) { run_gemm(s, kernels::reference::gemm_nn); }

#define GEMM_SHAPES Args({6, 64, 64})->Args({16, 384, 6})->Args({256, 256, 256})->Args({1024, 64, 64})
BENCHMARK(BM_gemm_parallel)->GEMM_SHAPES;
BENCHMARK(BM_gemm_serial)->GEMM_SHAPES;
BENCHMARK(BM_gemm_reference)->GEMM_SHAPES;

struct EvalFixture {
  GraphSet graphs;
  Checkpoint ck;
  EvalFixture() {
    SynthConfig cfg;
    cfg.scenes_per_class = 50;
    graphs = build_graph_set(synth_corpus(cfg));
    ck.config = ModelConfig{};
    ck.params = init_params(ck.config);
  }
};

const EvalFixture& fixture() {
  static const EvalFixture f;
  return f;
}

void BM_evaluate_parallel(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_model(f.ck, f.graphs).macro.f1);
}

void BM_evaluate_serial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_model_serial(f.ck, f.graphs).macro.f1);
}

BENCHMARK(BM_evaluate_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_evaluate_serial)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
