#include <benchmark/benchmark.h>

#include "convrot/analysis.hpp"
#include "convrot/hadamard.hpp"
#include "convrot/pipeline.hpp"

namespace {

using namespace convrot;

void BM_GroupRotate(benchmark::State& state) {
  int group = static_cast<int>(state.range(0));
  int cols = static_cast<int>(state.range(1));
  MatrixD x = synth_outliers(16, cols, OutlierMode::gaussian, 1.0, 1.0, 7);
  RotationSpec spec{RotationKind::regular, group};
  rotation_matrix(spec, group);  // build outside the timed loop
  for (auto _ : state) {
    benchmark::DoNotOptimize(group_rotate(x, spec));
  }
  state.SetItemsProcessed(state.iterations() * 16 * cols);
}
BENCHMARK(BM_GroupRotate)
    ->Args({16, 1024})
    ->Args({64, 1024})
    ->Args({256, 1024})
    ->Args({256, 4096})
    ->Args({1024, 4096});

void BM_GlobalRotate(benchmark::State& state) {
  int cols = static_cast<int>(state.range(0));
  MatrixD x = synth_outliers(16, cols, OutlierMode::gaussian, 1.0, 1.0, 7);
  RotationSpec spec{RotationKind::sylvester, kGlobalGroup};
  rotation_matrix(spec, cols);
  for (auto _ : state) {
    benchmark::DoNotOptimize(group_rotate(x, spec));
  }
  state.SetItemsProcessed(state.iterations() * 16 * cols);
}
BENCHMARK(BM_GlobalRotate)->Arg(1024)->Arg(2048)->Arg(4096);

void BM_Fwht(benchmark::State& state) {
  size_t n = static_cast<size_t>(state.range(0));
  std::vector<double> x(n, 1.0);
  for (auto _ : state) {
    fwht(std::span<double>(x));
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Fwht)->Arg(256)->Arg(1024)->Arg(4096);

}  // namespace
