#include <benchmark/benchmark.h>

#include "convrot/analysis.hpp"
#include "convrot/pipeline.hpp"
#include "convrot/quant.hpp"
#include "convrot/rng.hpp"

namespace {

using namespace convrot;

MatrixI8 random_codes(size_t rows, size_t cols, int qmax, uint64_t seed) {
  Rng rng(seed);
  MatrixI8 m(rows, cols);
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < cols; ++j) {
      m(i, j) = static_cast<int8_t>(
          static_cast<int64_t>(rng.next_below(2 * qmax + 1)) - qmax);
    }
  }
  return m;
}

void BM_IntGemm(benchmark::State& state) {
  size_t dim = static_cast<size_t>(state.range(0));
  int bits = static_cast<int>(state.range(1));
  int qmax = (1 << (bits - 1)) - 1;
  MatrixI8 a = random_codes(dim, dim, qmax, 1);
  MatrixI8 b = random_codes(dim, dim, qmax, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(int_gemm(a, b, bits, bits));
  }
  state.SetItemsProcessed(state.iterations() * dim * dim * dim);
}
BENCHMARK(BM_IntGemm)->Args({64, 4})->Args({128, 4})->Args({128, 8});

void BM_Forward(benchmark::State& state) {
  size_t cols = static_cast<size_t>(state.range(0));
  MatrixD x = synth_outliers(32, cols, OutlierMode::colwise, 50.0, 0.01, 3);
  MatrixD w = synth_outliers(32, cols, OutlierMode::gaussian, 1.0, 1.0, 4);
  RotationSpec rot{RotationKind::regular, 256};
  PreparedLayer layer = prepare_layer(w, std::nullopt, rot, QuantSpec{4}, "bench");
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(x, layer, QuantSpec{4}));
  }
}
BENCHMARK(BM_Forward)->Arg(1024)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
