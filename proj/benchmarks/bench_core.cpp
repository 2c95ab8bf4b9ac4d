#include <benchmark/benchmark.h>

#include "racelab/experiment.hpp"
#include "racelab/inference.hpp"
#include "racelab/learning.hpp"
#include "racelab/processes.hpp"
#include "racelab/races.hpp"

using namespace racelab;

namespace {

void BM_DdmTrial(benchmark::State& state) {
    const std::vector<double> drifts{10.0, 4.0};
    const RaceParams p{20.0, 100.0, std::nullopt, 1e-3};
    std::uint64_t k = 0;
    for (auto _ : state) benchmark::DoNotOptimize(ddm_trial(drifts, p, Seed{k++}));
}
BENCHMARK(BM_DdmTrial);

void BM_PoissonTrial(benchmark::State& state) {
    const std::vector<double> rates{10.0, 4.0};
    const RaceParams p{static_cast<double>(state.range(0)), 1e6, std::nullopt, 1e-3};
    std::uint64_t k = 0;
    for (auto _ : state) benchmark::DoNotOptimize(poisson_trial(rates, p, Seed{k++}));
}
BENCHMARK(BM_PoissonTrial)->Arg(10)->Arg(1000);

void BM_HawkesTrial(benchmark::State& state) {
    const ExperimentConfig config;
    const RocketTask task = make_rocket_task(config.gamma, Seed{1});
    const auto weights = WeightState::fixed(feature_discrepancy(task.universe).limit_weights);
    const RaceParams p = config.race_params(static_cast<double>(state.range(0)) / 1000.0);
    std::uint64_t k = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(hawkes_trial(task.universe, weights, k % 16, config.kernel, p, Seed{k++}));
}
BENCHMARK(BM_HawkesTrial)->Arg(50)->Arg(200);

void BM_EwaUpdate(benchmark::State& state) {
    auto s = WeightState::uniform(8, 2, 0.01);
    Matrix g(8, 2, 1.0);
    for (auto _ : state) {
        s = ewa_update(s, g);
        benchmark::DoNotOptimize(s.weights);
    }
}
BENCHMARK(BM_EwaUpdate);

void BM_SimulateSession(benchmark::State& state) {
    const ExperimentConfig config;
    const RocketTask task = make_rocket_task(config.gamma, Seed{2});
    std::uint64_t k = 0;
    for (auto _ : state) {
        const Session s = simulate_session(task, 1.0, 0.12, config, Seed{k++});
        benchmark::DoNotOptimize(summarize(s));
    }
}
BENCHMARK(BM_SimulateSession)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
