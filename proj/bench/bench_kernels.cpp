// Serial reference kernels vs. the OpenMP versions, and dataset scoring with
// one worker vs. all of them.

#include <random>

#include <benchmark/benchmark.h>

#include "augclip/harness.hpp"
#include "augclip/kernels.hpp"
#include "augclip/synthetic.hpp"

using namespace augclip;

namespace {

std::vector<Embedding> cloud(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Embedding> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(random_unit(dim, rng));
  return out;
}

void BM_CosineMatrixSerial(benchmark::State& state) {
  const auto a = cloud(static_cast<std::size_t>(state.range(0)), 512, 1);
  const auto b = cloud(static_cast<std::size_t>(state.range(0)), 512, 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::reference::cosine_matrix(a, b));
}

void BM_CosineMatrixParallel(benchmark::State& state) {
  const auto a = cloud(static_cast<std::size_t>(state.range(0)), 512, 1);
  const auto b = cloud(static_cast<std::size_t>(state.range(0)), 512, 2);
  state.counters["threads"] = kernels::max_threads();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::cosine_matrix(a, b));
}

const SyntheticDataset& dataset() {
  static const SyntheticDataset data = [] {
    SyntheticConfig s;
    s.triplets = 40;
    s.dim = 512;
    return make_synthetic_dataset(s);
  }();
  return data;
}

void BM_ScoreDataset(benchmark::State& state) {
  const auto& data = dataset();
  HarnessConfig cfg;
  cfg.workers = static_cast<int>(state.range(0));
  state.counters["threads"] = cfg.workers == 0 ? kernels::max_threads() : cfg.workers;
  for (auto _ : state) benchmark::DoNotOptimize(score_dataset(data.manifest, data.store, cfg));
}

}  // namespace

BENCHMARK(BM_CosineMatrixSerial)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_CosineMatrixParallel)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ScoreDataset)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
