#include <benchmark/benchmark.h>

#include "qsplit/qsplit.hpp"

using namespace qsplit;

namespace {

void BM_UnitaryPart(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const Matrix t = planted_contraction(d / 2, d - d / 2, 1).tuple.dense_part(0);
  for (auto _ : state) benchmark::DoNotOptimize(unitary_part(t));
}
BENCHMARK(BM_UnitaryPart)->RangeMultiplier(2)->Range(4, 64);

void BM_DefectKernel(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const Matrix t = planted_contraction(d / 2, d - d / 2, 1).tuple.dense_part(0);
  for (auto _ : state) benchmark::DoNotOptimize(defect_kernel_unitary_part(t));
}
BENCHMARK(BM_DefectKernel)->RangeMultiplier(2)->Range(4, 64);

void BM_TupleDecomposition(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const PlantedTuple p = planted_tuple(2, 3, {{"uu", 3 * b}, {"uc", b}, {"cu", b}, {"cc", b}}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(tuple_decomposition(p.tuple));
  state.counters["dim"] = static_cast<double>(p.tuple.dense_dim());
}
BENCHMARK(BM_TupleDecomposition)->DenseRange(2, 10, 4);

void BM_UnitaryCnuSplit(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const PlantedTuple p = planted_dc_tuple(3, {{"uu", 3 * b}, {"cc", b}}, b, 3);
  for (auto _ : state) benchmark::DoNotOptimize(unitary_cnu_split(p.tuple));
}
BENCHMARK(BM_UnitaryCnuSplit)->DenseRange(2, 10, 4);

void BM_VerifyDoubly(benchmark::State& state) {
  const OperatorTuple t = clock_shift(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(verify_doubly(t));
}
BENCHMARK(BM_VerifyDoubly)->RangeMultiplier(2)->Range(4, 64);

}  // namespace

BENCHMARK_MAIN();
