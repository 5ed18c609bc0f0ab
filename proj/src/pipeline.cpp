#include "evc/pipeline.hpp"

#include <fstream>

#include "evc/csv.hpp"
#include "evc/error.hpp"

namespace evc {

Datasets load_datasets(const RunConfig &cfg) {
    auto zones = load_zones(cfg.zones);
    Population population;
    if (cfg.population_file) {
        population = load_population(*cfg.population_file, zones);
    } else if (cfg.synthesis) {
        const auto params = load_synthesis_params(cfg.synthesis->params);
        population = synthesize_population(cfg.synthesis->n, params, cfg.synthesis->seed);
        std::vector<std::string> bad;
        for (const auto &ind : population) {
            for (auto &msg : check_individual(ind, zones)) {
                bad.push_back("synthesized individual " + std::to_string(ind.id) + ": " + msg);
            }
            if (bad.size() > 20) {
                break;
            }
        }
        if (!bad.empty()) {
            throw ValidationError(std::move(bad));
        }
    } else {
        throw ConfigError("config has no population source");
    }
    return Datasets{std::move(zones),
                    std::move(population),
                    load_rules(cfg.rules),
                    load_wfh_table(cfg.wfh_table),
                    cfg.presets.empty() ? PresetTable::defaults() : PresetTable::load(cfg.presets),
                    load_mode_specs(cfg.mode_specs),
                    load_transit_spec(cfg.transit_spec),
                    load_network(cfg.network),
                    cfg.charging,
                    cfg.population_weight,
                    cfg.reserve_ratio};
}

ScenarioRequest request_from_config(const RunConfig &cfg) {
    ScenarioRequest req;
    req.preset = cfg.preset;
    req.weights = cfg.weights;
    req.wfh_level = cfg.wfh_level;
    req.policies = cfg.policies;
    req.seed = cfg.seed;
    req.name = cfg.scenario_name;
    return req;
}

ScenarioOutcome evaluate_scenario(const Datasets &data, const ScenarioRequest &req, Exec exec) {
    const ScenarioInputs in{data.population, data.zones, data.rules, data.wfh, data.charging};
    ScenarioOutcome out;
    if (req.preset) {
        out.scenario = scenario_from_preset(in, data.presets, *req.preset, req.wfh_level, req.seed,
                                            exec);
    } else if (req.weights) {
        out.scenario = build_scenario(in, *req.weights, req.wfh_level, "custom", req.seed, exec);
    } else {
        throw ConfigError("scenario request needs a preset or weights");
    }
    if (!req.name.empty()) {
        out.scenario.name = req.name;
    }
    out.shares = shares(out.scenario, data.population, data.zones);
    const EnergyInputs energy{data.population, data.zones, data.specs, data.charging};
    for (auto policy : req.policies) {
        out.demand.emplace_back(policy, scenario_demand(out.scenario, energy, data.transit, policy,
                                                        data.population_weight, exec));
    }
    return out;
}

GridOptions grid_options(const Datasets &data, double lambda, Exec exec) {
    GridOptions o;
    o.lambda = lambda;
    o.reserve_ratio = data.reserve_ratio;
    o.exec = exec;
    return o;
}

namespace {

nlohmann::json issue_summary(const std::vector<TaskIssue> &issues) {
    std::size_t range = 0;
    std::size_t window = 0;
    double range_kwh = 0.0;
    double window_kwh = 0.0;
    for (const auto &i : issues) {
        if (i.kind == TaskIssue::Kind::RangeExceeded) {
            ++range;
            range_kwh += i.residual_kwh;
        } else {
            ++window;
            window_kwh += i.residual_kwh;
        }
    }
    return {{"range_exceeded", range},
            {"range_exceeded_kwh", range_kwh},
            {"window_too_short", window},
            {"window_too_short_kwh", window_kwh}};
}

void write_json(const std::filesystem::path &path, const nlohmann::json &doc) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << doc.dump(2) << '\n';
    if (!out) {
        throw Error("failed writing " + path.string());
    }
}

} // namespace

RunResult run(const RunConfig &cfg) {
    const auto data = load_datasets(cfg);
    const auto req = request_from_config(cfg);
    if (req.policies.empty()) {
        throw ConfigError("no charging policy requested");
    }
    const auto outcome = evaluate_scenario(data, req);
    const auto opts = grid_options(data, cfg.lambda);
    const auto envelope = capacity_envelope(data.network, opts);
    const auto audit = audit_capacity_result(data.network, envelope.result, opts);
    if (!audit.empty()) {
        throw GridError("capacity solution failed its audit: " + audit.front());
    }

    std::vector<std::pair<ChargingPolicy, HeadroomReport>> reports;
    nlohmann::json headroom_doc = nlohmann::json::object();
    for (const auto &[policy, demand] : outcome.demand) {
        reports.emplace_back(policy, headroom(demand.profile, envelope.mw));
        headroom_doc[std::string(to_string(policy))] = to_json(reports.back().second);
    }
    auto scenario_doc = scenario_metadata(outcome.scenario);
    scenario_doc["population_weight"] = data.population_weight;
    scenario_doc["charge_tasks"] = outcome.demand.front().second.task_count;
    scenario_doc["issues"] = issue_summary(outcome.demand.front().second.issues);
    auto shares_doc = to_json(outcome.shares);
    shares_doc["zones"] = to_json(zone_trip_shares(outcome.scenario, data.population));
    auto capacity_doc = to_json(data.network, envelope.result);
    capacity_doc["capacity_mw"] = envelope.mw;

    // Everything is computed; only now touch the output directory.
    const auto &dir = cfg.output_dir;
    std::filesystem::create_directories(dir);
    RunResult result;
    const auto file = [&](const std::string &name) {
        result.artifacts.push_back(dir / name);
        return dir / name;
    };
    write_scenario_csv(file("scenario.csv"), outcome.scenario);
    write_json(file("scenario.json"), scenario_doc);
    for (const auto &[policy, demand] : outcome.demand) {
        write_profile_csv(file("profile_" + std::string(to_string(policy)) + ".csv"),
                          demand.profile);
    }
    write_envelope_csv(file("capacity_envelope.csv"), envelope.mw,
                       envelope.result.total_additional_mw());
    write_json(file("capacity.json"), capacity_doc);
    write_json(file("headroom.json"), headroom_doc);
    write_json(file("shares.json"), shares_doc);

    result.summary = "scenario " + outcome.scenario.name + " (" +
                     std::to_string(data.population.size()) + " individuals, seed " +
                     std::to_string(outcome.scenario.seed) + ")\n\n" +
                     summary_table(outcome.shares, reports);
    return result;
}

std::filesystem::path demo_config_path() {
    return std::filesystem::path(EVC_DATA_DIR) / "demo" / "config.json";
}

} // namespace evc
