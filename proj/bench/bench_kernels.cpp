#include <benchmark/benchmark.h>

#include <filesystem>

#include "evc/eligibility.hpp"
#include "evc/energy.hpp"
#include "evc/grid.hpp"
#include "evc/network.hpp"
#include "evc/population.hpp"
#include "evc/sampler.hpp"

namespace {

const std::filesystem::path kData = EVC_DATA_DIR;

struct Fixture {
    evc::ZoneTable zones = evc::load_zones(kData / "zones.csv");
    evc::SynthesisParams params = evc::load_synthesis_params(kData / "synthesis.json");
    evc::RuleSet rules = evc::load_rules(kData / "rules.json");
    evc::WfhTable wfh = evc::load_wfh_table(kData / "wfh_table.json");
    evc::ModeSpecTable specs = evc::load_mode_specs(kData / "mode_specs.csv");
    evc::ChargingOptions charging;
};

const Fixture &fixture() {
    static const Fixture f;
    return f;
}

evc::Exec exec_of(const benchmark::State &state) {
    return state.range(1) == 0 ? evc::Exec::Serial : evc::Exec::Parallel;
}

void BM_Synthesize(benchmark::State &state) {
    const auto &f = fixture();
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            evc::synthesize_population(static_cast<std::size_t>(state.range(0)), f.params, 7,
                                       exec_of(state)));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BuildScenario(benchmark::State &state) {
    const auto &f = fixture();
    const auto pop = evc::synthesize_population(static_cast<std::size_t>(state.range(0)),
                                                f.params, 7);
    const evc::ScenarioInputs in{pop, f.zones, f.rules, f.wfh, f.charging};
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            evc::build_scenario(in, evc::WeightVector{}, evc::WfhLevel::Medium, "mix", 11,
                                exec_of(state)));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ScheduleEarliest(benchmark::State &state) {
    const auto &f = fixture();
    const auto pop = evc::synthesize_population(static_cast<std::size_t>(state.range(0)),
                                                f.params, 7);
    const evc::ScenarioInputs in{pop, f.zones, f.rules, f.wfh, f.charging};
    auto weights = evc::WeightVector{};
    weights[evc::Category::Car] = 5.0;
    const auto scn = evc::build_scenario(in, weights, evc::WfhLevel::Medium, "car", 11);
    const evc::EnergyInputs energy{pop, f.zones, f.specs, f.charging};
    const auto tasks = evc::build_charge_tasks(scn, energy);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            evc::schedule(tasks.tasks, evc::ChargingPolicy::Earliest, exec_of(state)));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(tasks.tasks.size()));
}

void BM_CapacityEnvelope(benchmark::State &state) {
    const auto net = evc::load_network(kData / "networks" / "six_bus");
    evc::GridOptions opts;
    opts.lambda = static_cast<double>(state.range(0)) / 100.0;
    opts.exec = exec_of(state);
    for (auto _ : state) {
        benchmark::DoNotOptimize(evc::capacity_envelope(net, opts));
    }
}

} // namespace

BENCHMARK(BM_Synthesize)->ArgsProduct({{100000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildScenario)->ArgsProduct({{100000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScheduleEarliest)->ArgsProduct({{100000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CapacityEnvelope)->ArgsProduct({{0, 10}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
