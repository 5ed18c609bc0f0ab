#include "evc/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "evc/csv.hpp"
#include "evc/error.hpp"

namespace evc {

std::vector<std::string> check_weights(const WeightVector &w) {
    std::vector<std::string> v;
    bool any_positive = false;
    for (auto c : kAllCategories) {
        const double x = w[c];
        if (!std::isfinite(x) || x < 0.0) {
            v.push_back("weights." + std::string(to_string(c)) + ": must be finite and >= 0");
        }
        any_positive = any_positive || x > 0.0;
    }
    if (!any_positive) {
        v.push_back("weights: at least one weight must be positive");
    }
    return v;
}

WeightVector parse_weights(const nlohmann::json &doc) {
    if (!doc.is_object()) {
        throw ValidationError({"weights: expected an object keyed by category"});
    }
    WeightVector w;
    w.w.fill(0.0);
    std::vector<std::string> errors;
    for (const auto &[k, v] : doc.items()) {
        auto c = parse_category(k);
        if (!c) {
            errors.push_back("weights: unknown category '" + k + "'");
        } else if (!v.is_number()) {
            errors.push_back("weights." + k + ": expected a number");
        } else {
            w[*c] = v.get<double>();
        }
    }
    if (!errors.empty()) {
        throw ValidationError(std::move(errors));
    }
    return w;
}

nlohmann::json to_json(const WeightVector &w) {
    nlohmann::json j = nlohmann::json::object();
    for (auto c : kAllCategories) {
        j[std::string(to_string(c))] = w[c];
    }
    return j;
}

std::string_view to_string(WfhLevel l) noexcept {
    switch (l) {
    case WfhLevel::High:
        return "High";
    case WfhLevel::Zero:
        return "Zero";
    case WfhLevel::Medium:
        break;
    }
    return "Medium";
}

std::optional<WfhLevel> parse_wfh_level(std::string_view s) noexcept {
    if (s == "High") {
        return WfhLevel::High;
    }
    if (s == "Medium") {
        return WfhLevel::Medium;
    }
    if (s == "Zero") {
        return WfhLevel::Zero;
    }
    return std::nullopt;
}

double wfh_level_factor(WfhLevel l) noexcept {
    switch (l) {
    case WfhLevel::High:
        return 1.5;
    case WfhLevel::Zero:
        return 0.0;
    case WfhLevel::Medium:
        break;
    }
    return 1.0;
}

namespace {
constexpr std::array<std::string_view, 5> kPresetNames{
    "Baseline2019", "TransitFocused", "CarFocused", "MicromobilityFocused", "Mix"};
} // namespace

std::string_view to_string(Preset p) noexcept { return kPresetNames[static_cast<int>(p)]; }

std::optional<Preset> parse_preset(std::string_view s) noexcept {
    for (std::size_t i = 0; i < kPresetNames.size(); ++i) {
        if (kPresetNames[i] == s) {
            return kAllPresets[i];
        }
    }
    return std::nullopt;
}

PresetTable PresetTable::defaults() {
    constexpr double kFocus = 5.0;
    PresetTable t;
    t.set(Preset::Baseline2019, PresetSpec{WeightVector{}, true});
    const auto focused = [&](Category c) {
        WeightVector w;
        w[c] = kFocus;
        return PresetSpec{w, false};
    };
    t.set(Preset::TransitFocused, focused(Category::Transit));
    t.set(Preset::CarFocused, focused(Category::Car));
    t.set(Preset::MicromobilityFocused, focused(Category::Micromobility));
    t.set(Preset::Mix, PresetSpec{WeightVector{}, false});
    return t;
}

PresetTable PresetTable::parse(const nlohmann::json &doc) {
    auto t = defaults();
    std::vector<std::string> errors;
    if (!doc.is_object()) {
        throw ValidationError({"presets: expected an object keyed by preset name"});
    }
    for (const auto &[name, body] : doc.items()) {
        auto p = parse_preset(name);
        if (!p) {
            if (name.starts_with("_")) {
                continue; // comment keys
            }
            errors.push_back("presets: unknown preset '" + name + "'");
            continue;
        }
        PresetSpec spec = t.at(*p);
        try {
            if (body.contains("bypass")) {
                spec.bypass_sampling = body.at("bypass").get<bool>();
            }
            if (body.contains("weights")) {
                spec.weights = parse_weights(body.at("weights"));
            }
        } catch (const ValidationError &e) {
            for (const auto &d : e.diagnostics()) {
                errors.push_back(name + "." + d);
            }
            continue;
        } catch (const nlohmann::json::exception &e) {
            errors.push_back(name + ": " + e.what());
            continue;
        }
        if (!spec.bypass_sampling) {
            for (const auto &d : check_weights(spec.weights)) {
                errors.push_back(name + "." + d);
            }
        }
        t.set(*p, spec);
    }
    if (!errors.empty()) {
        throw ValidationError(std::move(errors));
    }
    return t;
}

PresetTable PresetTable::load(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open presets: " + path.string());
    }
    try {
        return parse(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error &e) {
        throw ValidationError({path.string() + ": " + e.what()});
    }
}

const PresetSpec &PresetTable::at(Preset p) const {
    auto it = specs_.find(p);
    if (it == specs_.end()) {
        throw ConfigError("preset not defined: " + std::string(to_string(p)));
    }
    return it->second;
}

PresetSpec preset(const PresetTable &table, Preset p) { return table.at(p); }

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

std::array<double, kModeCount> effective_weights(const ModeSet &eligible,
                                                 const WeightVector &weights, double p_wfh) {
    std::array<double, kModeCount> eff{};
    for (auto m : kAllModes) {
        if (!eligible.contains(m)) {
            continue;
        }
        const auto c = category_of(m);
        if (c == Category::WFH) {
            eff[index_of(m)] = weights[c] * p_wfh;
        } else {
            eff[index_of(m)] = weights[c] / static_cast<double>(eligible.count(c));
        }
    }
    return eff;
}

Mode assign_mode(const ModeSet &eligible, const WeightVector &weights, double p_wfh, double u) {
    if (eligible.empty()) {
        throw std::invalid_argument("assign_mode: empty eligible set");
    }
    const auto eff = effective_weights(eligible, weights, p_wfh);
    double total = 0.0;
    for (double w : eff) {
        total += w;
    }
    if (total > 0.0) {
        const double target = u * total;
        double cum = 0.0;
        Mode last = kAllModes.front();
        for (auto m : kAllModes) {
            const double w = eff[index_of(m)];
            if (w <= 0.0) {
                continue;
            }
            cum += w;
            last = m;
            if (target < cum) {
                return m;
            }
        }
        return last;
    }
    ModeSet candidates = eligible;
    if (p_wfh <= 0.0) {
        candidates.erase(Mode::WFH);
    }
    if (candidates.empty()) {
        candidates = eligible;
    }
    const auto n = candidates.size();
    auto k = std::min(static_cast<std::size_t>(u * static_cast<double>(n)), n - 1);
    for (auto m : kAllModes) {
        if (candidates.contains(m)) {
            if (k == 0) {
                return m;
            }
            --k;
        }
    }
    return kAllModes.front(); // unreachable
}

Mode assign_mode(const ModeSet &eligible, const WeightVector &weights, double p_wfh, Rng &rng) {
    return assign_mode(eligible, weights, p_wfh, uniform01(rng));
}

namespace {

Assignment assign_one(const Individual &ind, const ScenarioInputs &in, const WeightVector &weights,
                      double level_factor, std::uint64_t seed) {
    const auto eligible = eligible_set(ind, in.rules, in.zones, &in.wfh_table);
    const double p_wfh = std::clamp(wfh_probability(ind, in.wfh_table) * level_factor, 0.0, 1.0);
    auto mode_rng = make_stream(seed, static_cast<std::uint64_t>(ind.id), Stream::ModeChoice);
    const Mode mode = assign_mode(eligible, weights, p_wfh, mode_rng);
    auto loc_rng = make_stream(seed, static_cast<std::uint64_t>(ind.id), Stream::ChargeLocation);
    return Assignment{ind.id, mode,
                      choose_charge_location(ind, mode, in.charging, uniform01(loc_rng))};
}

Assignment copy_baseline(const Individual &ind, const ScenarioInputs &in, std::uint64_t seed) {
    auto loc_rng = make_stream(seed, static_cast<std::uint64_t>(ind.id), Stream::ChargeLocation);
    return Assignment{
        ind.id, ind.baseline_mode,
        choose_charge_location(ind, ind.baseline_mode, in.charging, uniform01(loc_rng))};
}

template <class Fn>
std::vector<Assignment> map_population(const Population &pop, Exec exec, Fn &&fn) {
    std::vector<Assignment> out(pop.size());
    const auto n = static_cast<std::int64_t>(pop.size());
    if (exec == Exec::Serial) {
        for (std::int64_t i = 0; i < n; ++i) {
            out[static_cast<std::size_t>(i)] = fn(pop[static_cast<std::size_t>(i)]);
        }
    } else {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) {
            out[static_cast<std::size_t>(i)] = fn(pop[static_cast<std::size_t>(i)]);
        }
    }
    return out;
}

} // namespace

Scenario build_scenario(const ScenarioInputs &in, const WeightVector &weights, WfhLevel level,
                        std::string name, std::uint64_t seed, Exec exec) {
    if (auto v = check_weights(weights); !v.empty()) {
        throw ValidationError(std::move(v));
    }
    // Resolve rules up front so a missing rule fails before the parallel region.
    for (auto m : kAllModes) {
        (void)in.rules.rule_for(m);
    }
    Scenario scn;
    scn.name = std::move(name);
    scn.wfh_level = level;
    scn.seed = seed;
    scn.weights = weights;
    const double factor = wfh_level_factor(level);
    scn.assignments = map_population(in.population, exec, [&](const Individual &ind) {
        return assign_one(ind, in, weights, factor, seed);
    });
    return scn;
}

Scenario baseline_scenario(const ScenarioInputs &in, WfhLevel level, std::string name,
                           std::uint64_t seed, Exec exec) {
    Scenario scn;
    scn.name = std::move(name);
    scn.wfh_level = level;
    scn.seed = seed;
    scn.baseline_bypass = true;
    scn.assignments = map_population(in.population, exec, [&](const Individual &ind) {
        return copy_baseline(ind, in, seed);
    });
    return scn;
}

Scenario scenario_from_preset(const ScenarioInputs &in, const PresetTable &presets, Preset p,
                              WfhLevel level, std::uint64_t seed, Exec exec) {
    const auto spec = preset(presets, p);
    auto name = std::string(to_string(p));
    if (spec.bypass_sampling) {
        auto scn = baseline_scenario(in, level, std::move(name), seed, exec);
        scn.weights = spec.weights;
        return scn;
    }
    return build_scenario(in, spec.weights, level, std::move(name), seed, exec);
}

std::vector<std::string> check_scenario(const Scenario &scn, const ScenarioInputs &in) {
    std::vector<std::string> v;
    if (scn.assignments.size() != in.population.size()) {
        v.push_back("scenario size does not match population");
        return v;
    }
    for (std::size_t i = 0; i < scn.assignments.size(); ++i) {
        const auto &a = scn.assignments[i];
        const auto &ind = in.population[i];
        const auto who = "individual " + std::to_string(a.individual_id);
        if (a.individual_id != ind.id) {
            v.push_back(who + ": id out of population order");
            continue;
        }
        if (!scn.baseline_bypass &&
            !eligible_set(ind, in.rules, in.zones, &in.wfh_table).contains(a.mode)) {
            v.push_back(who + ": mode " + std::string(to_string(a.mode)) + " not eligible");
        }
        if ((a.charge != ChargeLocation::None) != needs_charge_location(a.mode)) {
            v.push_back(who + ": charge location inconsistent with mode");
        }
    }
    return v;
}

void write_scenario_csv(const std::filesystem::path &path, const Scenario &scn) {
    std::vector<std::string> lines;
    lines.reserve(scn.assignments.size() + 1);
    lines.emplace_back("individual_id,mode,charge_location");
    for (const auto &a : scn.assignments) {
        lines.push_back(std::to_string(a.individual_id) + ',' + std::string(to_string(a.mode)) +
                        ',' + std::string(to_string(a.charge)));
    }
    csv::write_lines(path, lines);
}

nlohmann::json scenario_metadata(const Scenario &scn) {
    return nlohmann::json{{"name", scn.name},
                          {"seed", scn.seed},
                          {"weights", to_json(scn.weights)},
                          {"wfh_level", std::string(to_string(scn.wfh_level))},
                          {"baseline_bypass", scn.baseline_bypass},
                          {"individuals", scn.assignments.size()}};
}

} // namespace evc
