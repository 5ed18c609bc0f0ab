#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "evc/charging.hpp"
#include "evc/eligibility.hpp"
#include "evc/exec.hpp"
#include "evc/modes.hpp"
#include "evc/population.hpp"
#include "evc/rng.hpp"

namespace evc {

/// Non-negative weight per category. Category weight is split uniformly
/// across the eligible sub-modes of that category.
struct WeightVector {
    std::array<double, kCategoryCount> w{1.0, 1.0, 1.0, 1.0};

    double &operator[](Category c) noexcept { return w[index_of(c)]; }
    double operator[](Category c) const noexcept { return w[index_of(c)]; }
    bool operator==(const WeightVector &) const = default;
};

/// Violations of the WeightVector invariants (finite, >= 0, one positive).
std::vector<std::string> check_weights(const WeightVector &w);
WeightVector parse_weights(const nlohmann::json &doc);
nlohmann::json to_json(const WeightVector &w);

enum class WfhLevel { High, Medium, Zero };

std::string_view to_string(WfhLevel l) noexcept;
std::optional<WfhLevel> parse_wfh_level(std::string_view s) noexcept;
/// High 1.5, Medium 1.0, Zero 0.0.
double wfh_level_factor(WfhLevel l) noexcept;

enum class Preset { Baseline2019, TransitFocused, CarFocused, MicromobilityFocused, Mix };

inline constexpr std::array<Preset, 5> kAllPresets{Preset::Baseline2019, Preset::TransitFocused,
                                                   Preset::CarFocused,
                                                   Preset::MicromobilityFocused, Preset::Mix};

std::string_view to_string(Preset p) noexcept;
std::optional<Preset> parse_preset(std::string_view s) noexcept;

struct PresetSpec {
    WeightVector weights;
    bool bypass_sampling = false; ///< copy each individual's baseline mode
};

class PresetTable {
  public:
    /// Focused presets weight their category 5:1 over the others; Mix is flat.
    static PresetTable defaults();
    /// {"TransitFocused": {"weights": {"Transit": 5, ...}}, "Baseline2019": {"bypass": true}}
    static PresetTable parse(const nlohmann::json &doc);
    static PresetTable load(const std::filesystem::path &path);

    const PresetSpec &at(Preset p) const;
    void set(Preset p, PresetSpec spec) { specs_[p] = spec; }

  private:
    std::map<Preset, PresetSpec> specs_;
};

/// Weights and behaviour flags of a named preset. The WFH level does not
/// change the weights; it is applied when the scenario is built.
PresetSpec preset(const PresetTable &table, Preset p);

struct Assignment {
    std::int64_t individual_id = 0;
    Mode mode = Mode::Subway;
    ChargeLocation charge = ChargeLocation::None;

    bool operator==(const Assignment &) const = default;
};

/// A complete mode assignment, aligned with the population order.
struct Scenario {
    std::string name;
    WfhLevel wfh_level = WfhLevel::Medium;
    std::uint64_t seed = 0;
    WeightVector weights;
    bool baseline_bypass = false;
    std::vector<Assignment> assignments;

    bool operator==(const Scenario &) const = default;
};

/// Mode draw from a uniform variate u in [0,1): probability proportional to
/// the effective weight, WFH weighted by w[WFH] * p_wfh. Falls back to a
/// uniform pick over eligible modes (WFH excluded when p_wfh == 0) when every
/// effective weight is zero. Throws std::invalid_argument on an empty set.
Mode assign_mode(const ModeSet &eligible, const WeightVector &weights, double p_wfh, double u);
Mode assign_mode(const ModeSet &eligible, const WeightVector &weights, double p_wfh, Rng &rng);

/// Effective sampling weight of each mode in `eligible` (zero elsewhere).
std::array<double, kModeCount> effective_weights(const ModeSet &eligible,
                                                 const WeightVector &weights, double p_wfh);

struct ScenarioInputs {
    const Population &population;
    const ZoneTable &zones;
    const RuleSet &rules;
    const WfhTable &wfh_table;
    const ChargingOptions &charging;
};

/// Weighted sampling over each individual's eligible set. Deterministic in
/// the seed: every individual draws from its own (seed, id) stream.
Scenario build_scenario(const ScenarioInputs &in, const WeightVector &weights, WfhLevel level,
                        std::string name, std::uint64_t seed, Exec exec = Exec::Parallel);

/// Copies each baseline mode (no sampling) and assigns charge locations.
Scenario baseline_scenario(const ScenarioInputs &in, WfhLevel level, std::string name,
                           std::uint64_t seed, Exec exec = Exec::Parallel);

/// Dispatches to baseline_scenario or build_scenario according to the preset.
Scenario scenario_from_preset(const ScenarioInputs &in, const PresetTable &presets, Preset p,
                              WfhLevel level, std::uint64_t seed, Exec exec = Exec::Parallel);

/// Violations of the Scenario invariants (eligibility, charge location).
std::vector<std::string> check_scenario(const Scenario &scn, const ScenarioInputs &in);

/// CSV `individual_id,mode,charge_location` plus metadata JSON.
void write_scenario_csv(const std::filesystem::path &path, const Scenario &scn);
nlohmann::json scenario_metadata(const Scenario &scn);

} // namespace evc
