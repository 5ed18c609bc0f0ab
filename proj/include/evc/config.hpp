#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evc/charging.hpp"
#include "evc/energy.hpp"
#include "evc/sampler.hpp"

namespace evc {

struct SynthesisSource {
    std::filesystem::path params;
    std::size_t n = 0;
    std::uint64_t seed = 0;
};

/// Everything one batch run needs. Relative paths in the JSON document are
/// resolved against the config file's directory.
struct RunConfig {
    std::filesystem::path source; ///< config file, for messages

    std::filesystem::path zones;
    std::optional<std::filesystem::path> population_file;
    std::optional<SynthesisSource> synthesis;

    std::filesystem::path rules;
    std::filesystem::path wfh_table;
    std::filesystem::path presets;
    std::filesystem::path mode_specs;
    std::filesystem::path transit_spec;
    std::filesystem::path network;

    std::string scenario_name;
    std::optional<Preset> preset;
    std::optional<WeightVector> weights;
    WfhLevel wfh_level = WfhLevel::Medium;
    std::uint64_t seed = 0;

    std::vector<ChargingPolicy> policies{kAllPolicies.begin(), kAllPolicies.end()};
    double lambda = 0.0;
    double reserve_ratio = 0.0;
    double population_weight = 1.0;
    ChargingOptions charging;
    std::filesystem::path output_dir;
};

/// Structural parse; throws ValidationError listing every problem found.
RunConfig parse_config(const nlohmann::json &doc, const std::filesystem::path &base_dir);
RunConfig load_config(const std::filesystem::path &path);

/// All schema and reference problems of a config file and the documents it
/// points to, without running the pipeline. Empty when valid.
std::vector<std::string> validate_config(const std::filesystem::path &path);

} // namespace evc
