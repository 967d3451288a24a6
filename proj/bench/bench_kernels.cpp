// Serial reference vs OpenMP batch kernels on a BERT-sized workload.
#include <benchmark/benchmark.h>

#include <numeric>

#include "rhetprobe/kernels.hpp"
#include "rhetprobe/rng.hpp"

using namespace rhetprobe;

namespace {

struct Workload {
  ProbeSet set;
  ProbeModel model;
  std::vector<std::size_t> batch;
};

const Workload& workload() {
  static const Workload w = [] {
    constexpr std::size_t docs = 64, L = 256, D = 768, d = 10, m = 24;
    Workload out;
    Rng rng(1);
    for (std::size_t i = 0; i < docs; ++i) {
      MatrixF x(L, D);
      for (float& v : x.flat()) v = static_cast<float>(rng.normal());
      out.set.inputs.push_back(std::move(x));
      std::vector<double> t(m);
      for (double& v : t) v = rng.normal();
      out.set.targets.push_back(std::move(t));
    }
    out.model = ProbeModel::gaussian(D, d, m, 2);
    out.batch.resize(32);
    std::iota(out.batch.begin(), out.batch.end(), std::size_t{0});
    return out;
  }();
  return w;
}

void BM_GradsSerial(benchmark::State& state) {
  const auto& w = workload();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::batch_grads_serial(w.set, w.batch, w.model));
}

void BM_GradsOmp(benchmark::State& state) {
  const auto& w = workload();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::batch_grads_omp(w.set, w.batch, w.model));
  state.counters["threads"] = kernels::max_threads();
}

void BM_ForwardSerial(benchmark::State& state) {
  const auto& w = workload();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::batch_forward_serial(w.set, w.model));
}

void BM_ForwardOmp(benchmark::State& state) {
  const auto& w = workload();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::batch_forward_omp(w.set, w.model));
  state.counters["threads"] = kernels::max_threads();
}

}  // namespace

BENCHMARK(BM_GradsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GradsOmp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardOmp)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
