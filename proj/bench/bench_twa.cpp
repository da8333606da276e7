#include <benchmark/benchmark.h>

#include "sr1d/meanfield.hpp"
#include "sr1d/twa.hpp"

namespace {

sr1d::ReservoirModel bench_model(int n) {
    return sr1d::build_model(sr1d::ModelKind::Waveguide, n, 2.0943951023931953, {1.0, 0.0, 0.25 * n});
}

constexpr int kTraj = 16;
constexpr int kSteps = 500;

void BM_twa_reference(benchmark::State& state) {
    const auto model = bench_model(static_cast<int>(state.range(0)));
    const double dt = sr1d::meanfield::max_time_step(model);
    for (auto _ : state) {
        auto ens = sr1d::twa::make_ensemble(model, sr1d::twa::InitialState::AllGround, kTraj, 7);
        sr1d::twa::integrate_ensemble_reference(model, ens, kSteps * dt, dt);
        benchmark::DoNotOptimize(ens.states.data());
    }
    state.SetItemsProcessed(state.iterations() * kTraj * kSteps);
}

void BM_twa_parallel(benchmark::State& state) {
    const auto model = bench_model(static_cast<int>(state.range(0)));
    const double dt = sr1d::meanfield::max_time_step(model);
    for (auto _ : state) {
        auto ens = sr1d::twa::make_ensemble(model, sr1d::twa::InitialState::AllGround, kTraj, 7);
        sr1d::twa::integrate_ensemble(model, ens, kSteps * dt, dt);
        benchmark::DoNotOptimize(ens.states.data());
    }
    state.SetItemsProcessed(state.iterations() * kTraj * kSteps);
}

}  // namespace

BENCHMARK(BM_twa_reference)->Arg(16)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_twa_parallel)->Arg(16)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
