#include "fieldcal/fieldcal.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace fieldcal;

const SyntheticCase& small_case() {
    static const SyntheticCase c = make_case(1, 36, 25, 0.2, 4, 4);
    return c;
}

const SyntheticCase& room_case() {
    static const SyntheticCase c = make_case(11, 365, 167, 0.02, 4, 4);
    return c;
}

void BM_SensorColumns(benchmark::State& state) {
    const auto& c = room_case();
    const CalibrationParams params;
    for (auto _ : state) benchmark::DoNotOptimize(sensor_affinity_columns(c.problem, params));
}
BENCHMARK(BM_SensorColumns)->Unit(benchmark::kMillisecond);

void BM_DenseSolve(benchmark::State& state) {
    const auto& c = small_case();
    const CalibrationParams params;
    for (auto _ : state) benchmark::DoNotOptimize(solve_dense(assemble_dense(c.problem, params)));
}
BENCHMARK(BM_DenseSolve)->Unit(benchmark::kMillisecond);

void BM_LowRankSolve(benchmark::State& state) {
    const auto& c = room_case();
    CalibrationParams params;
    params.solver = SolverKind::lowrank;
    params.n_samples = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_lowrank(c.problem, params));
}
BENCHMARK(BM_LowRankSolve)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
