// Serial reference vs OpenMP kernels.
#include <benchmark/benchmark.h>

#include <random>

#include "downwash/field_analysis.hpp"
#include "downwash/jet_model.hpp"

namespace {

using namespace downwash;

DownwashModel default_model() {
    const VehicleGeometry g;
    const Environment env;
    const JetScaling s;
    return DownwashModel(g, s, NearFieldConfig::defaults(g, env, s));
}

GridSpec grid_of(long n) {
    return GridSpec{-3.0, 3.0, static_cast<std::size_t>(n), -2.0, 20.0,
                    static_cast<std::size_t>(n)};
}

void BM_EvaluateFieldSerial(benchmark::State& state) {
    const DownwashModel model = default_model();
    const GridSpec grid = grid_of(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(evaluate_field_serial(model, grid));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_EvaluateFieldParallel(benchmark::State& state) {
    const DownwashModel model = default_model();
    const GridSpec grid = grid_of(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(evaluate_field(model, grid));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

std::vector<VelocityField> frames_of(long n, long count) {
    const VelocityField base = evaluate_field(default_model(), grid_of(n));
    std::mt19937_64 rng(7);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<VelocityField> frames(static_cast<std::size_t>(count), base);
    for (VelocityField& f : frames) {
        for (std::size_t i = 0; i < f.size(); ++i) {
            f.u[i] += noise(rng);
            f.v[i] += noise(rng);
            if (i % 97 == 0) f.valid[i] = 0;
        }
    }
    return frames;
}

void BM_TimeAverageSerial(benchmark::State& state) {
    const auto frames = frames_of(state.range(0), 16);
    for (auto _ : state) benchmark::DoNotOptimize(time_average_serial(frames));
    state.SetItemsProcessed(state.iterations() * 16 * state.range(0) * state.range(0));
}

void BM_TimeAverageParallel(benchmark::State& state) {
    const auto frames = frames_of(state.range(0), 16);
    for (auto _ : state) benchmark::DoNotOptimize(time_average(frames));
    state.SetItemsProcessed(state.iterations() * 16 * state.range(0) * state.range(0));
}

}  // namespace

BENCHMARK(BM_EvaluateFieldSerial)->Arg(128)->Arg(512)->UseRealTime();
BENCHMARK(BM_EvaluateFieldParallel)->Arg(128)->Arg(512)->UseRealTime();

BENCHMARK(BM_TimeAverageSerial)->Arg(128)->Arg(512)->UseRealTime();
BENCHMARK(BM_TimeAverageParallel)->Arg(128)->Arg(512)->UseRealTime();

BENCHMARK_MAIN();
