// OpenMP kernels against their serial references.
#include "ksrl/reference.hpp"
#include "ksrl/synthetic.hpp"

#include <benchmark/benchmark.h>

using namespace ksrl;

namespace {

RowMat points(int n, int d) {
  Rng rng(1);
  return GaussianMixture::standard_normal(d).sample(static_cast<std::size_t>(n), rng);
}

void BM_GramParallel(benchmark::State& state) {
  const RowMat p = points(static_cast<int>(state.range(0)), 7);
  for (auto _ : state) benchmark::DoNotOptimize(gram_build(p, -p, BaseKernelConfig{}).total);
  state.SetComplexityN(state.range(0));
}

void BM_GramSerial(benchmark::State& state) {
  const RowMat p = points(static_cast<int>(state.range(0)), 7);
  for (auto _ : state) benchmark::DoNotOptimize(reference::gram_build_serial(p, -p, BaseKernelConfig{}).total);
  state.SetComplexityN(state.range(0));
}

struct Population {
  FeatureMap fm = FeatureMap::random_fourier(4, 64, 1.0, 2);
  Mat Bt = Mat::Constant(64, 3, 0.01);
  Mat Br = Mat::Constant(64, 1, -0.01);
  std::vector<Mat> seqs;
  explicit Population(int popsize) {
    Rng rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    seqs.assign(static_cast<std::size_t>(popsize), Mat(20, 1));
    for (auto& s : seqs)
      for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = u(rng);
  }
};

void BM_PopulationParallel(benchmark::State& state) {
  const Population pop(static_cast<int>(state.range(0)));
  const SampledLinearModel model(pop.fm, pop.Bt, pop.Br, 3);
  const Vec s = Vec::Constant(3, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_population(model, s, pop.seqs).front());
}

void BM_PopulationSerial(benchmark::State& state) {
  const Population pop(static_cast<int>(state.range(0)));
  const SampledLinearModel model(pop.fm, pop.Bt, pop.Br, 3);
  const Vec s = Vec::Constant(3, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(reference::evaluate_population_serial(model, s, pop.seqs).front());
}

}  // namespace

BENCHMARK(BM_GramParallel)->RangeMultiplier(2)->Range(128, 2048)->Unit(benchmark::kMillisecond)->Complexity();
BENCHMARK(BM_GramSerial)->RangeMultiplier(2)->Range(128, 2048)->Unit(benchmark::kMillisecond)->Complexity();
BENCHMARK(BM_PopulationParallel)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PopulationSerial)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
