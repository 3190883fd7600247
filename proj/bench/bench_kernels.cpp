// Serial reference vs OpenMP detection kernel on the synthetic fields.
#include <benchmark/benchmark.h>

#include "fingertrack/ridge.hpp"
#include "fingertrack/synthetic.hpp"

using namespace fingertrack;

namespace {

const ScalarField& field_for(SyntheticKind kind) {
  static const ScalarField branching = generate_synthetic(SyntheticParams::defaults(SyntheticKind::branching_finger)).fields[0];
  static const ScalarField twin = generate_synthetic(SyntheticParams::defaults(SyntheticKind::twin_blob_merge)).fields[0];
  return kind == SyntheticKind::branching_finger ? branching : twin;
}

DetectionParams params_for(benchmark::State& state) {
  DetectionParams p;
  p.r = static_cast<double>(state.range(1));
  return p;
}

void BM_DetectSerial(benchmark::State& state) {
  const ScalarField& f = field_for(static_cast<SyntheticKind>(state.range(0)));
  const DetectionParams p = params_for(state);
  for (auto _ : state) benchmark::DoNotOptimize(detect_ridge_voxels_serial(f, p));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.spec().cell_count()));
}

void BM_DetectParallel(benchmark::State& state) {
  const ScalarField& f = field_for(static_cast<SyntheticKind>(state.range(0)));
  const DetectionParams p = params_for(state);
  for (auto _ : state) benchmark::DoNotOptimize(detect_ridge_voxels(f, p, static_cast<int>(state.range(2))));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.spec().cell_count()));
}

void BM_DetectWithSpacing(benchmark::State& state) {
  const ScalarField& f = field_for(SyntheticKind::branching_finger);
  DetectionParams p;
  const double h = f.spec().spacing / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(detect_with_spacing(f, h, p, static_cast<int>(state.range(1))));
}

constexpr long kBranching = static_cast<long>(SyntheticKind::branching_finger);
constexpr long kTwin = static_cast<long>(SyntheticKind::twin_blob_merge);

}  // namespace

BENCHMARK(BM_DetectSerial)->Args({kBranching, 1})->Args({kBranching, 10})->Args({kTwin, 1})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DetectParallel)
    ->ArgsProduct({{kBranching, kTwin}, {1, 10}, {1, 2, 4, 0}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_DetectWithSpacing)->ArgsProduct({{2, 4}, {1, 0}})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
