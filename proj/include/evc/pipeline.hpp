#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evc/config.hpp"
#include "evc/eligibility.hpp"
#include "evc/energy.hpp"
#include "evc/grid.hpp"
#include "evc/network.hpp"
#include "evc/population.hpp"
#include "evc/report.hpp"
#include "evc/sampler.hpp"

namespace evc {

/// Immutable inputs shared by the CLI and the HTTP service.
struct Datasets {
    ZoneTable zones;
    Population population;
    RuleSet rules;
    WfhTable wfh;
    PresetTable presets;
    ModeSpecTable specs;
    TransitSpec transit;
    Network network;
    ChargingOptions charging;
    double population_weight = 1.0;
    double reserve_ratio = 0.0;
};

Datasets load_datasets(const RunConfig &cfg);

struct ScenarioRequest {
    std::optional<Preset> preset;
    std::optional<WeightVector> weights; ///< custom weights when no preset
    WfhLevel wfh_level = WfhLevel::Medium;
    std::vector<ChargingPolicy> policies{kAllPolicies.begin(), kAllPolicies.end()};
    std::uint64_t seed = 0;
    std::string name;
};

ScenarioRequest request_from_config(const RunConfig &cfg);

struct ScenarioOutcome {
    Scenario scenario;
    ShareBreakdown shares;
    std::vector<std::pair<ChargingPolicy, DemandResult>> demand;
};

/// The scenario half of the pipeline: sample modes, compute shares and the
/// demand profile under each requested policy.
ScenarioOutcome evaluate_scenario(const Datasets &data, const ScenarioRequest &req,
                                  Exec exec = Exec::Parallel);

/// Grid options implied by the datasets for a given lambda.
GridOptions grid_options(const Datasets &data, double lambda, Exec exec = Exec::Parallel);

struct RunResult {
    std::vector<std::filesystem::path> artifacts;
    std::string summary;
};

/// Full batch pipeline. Every artifact is computed before the first file is
/// written, so a failure leaves the output directory untouched.
RunResult run(const RunConfig &cfg);

/// Location of the bundled demo configuration.
std::filesystem::path demo_config_path();

} // namespace evc
