#include <benchmark/benchmark.h>

#include "supou/simulator.hpp"

namespace {

const supou::ParamVector kShort{0.015, 0.003, 4.0, -0.1};

void run(benchmark::State& state, supou::ModelKind kind) {
    const auto spec = supou::sim::LevySpec::matching(kShort.mu, kShort.sigma2);
    const supou::ObservationSchedule schedule{1.0, static_cast<int>(state.range(0))};
    supou::sim::SimulationConfig config;
    for (auto _ : state) {
        ++config.seed;
        benchmark::DoNotOptimize(
            supou::sim::simulate_path(kind, spec, supou::PiSpec::from(kShort), schedule, config));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SimulateSupOU(benchmark::State& state) { run(state, supou::ModelKind::SupOU); }
void BM_SimulateIntegrated(benchmark::State& state) { run(state, supou::ModelKind::IntegratedSupOU); }
void BM_SimulateSV(benchmark::State& state) { run(state, supou::ModelKind::SupOUSV); }

BENCHMARK(BM_SimulateSupOU)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateIntegrated)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateSV)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
