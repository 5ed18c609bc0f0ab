#include "evc/config.hpp"

#include <fstream>
#include <set>

#include "evc/eligibility.hpp"
#include "evc/error.hpp"
#include "evc/network.hpp"
#include "evc/population.hpp"

namespace evc {

namespace {

using nlohmann::json;

class Reader {
  public:
    Reader(const json &doc, std::filesystem::path base) : doc_(doc), base_(std::move(base)) {}

    std::vector<std::string> errors;

    void only(const json &obj, const std::string &where, std::set<std::string> allowed) {
        for (const auto &[k, v] : obj.items()) {
            if (!allowed.contains(k)) {
                errors.push_back(where + k + ": unknown field");
            }
        }
    }

    std::filesystem::path path(const json &obj, const std::string &key, const std::string &where,
                               bool required = true) {
        if (!obj.contains(key)) {
            if (required) {
                errors.push_back(where + key + ": required");
            }
            return {};
        }
        if (!obj[key].is_string()) {
            errors.push_back(where + key + ": expected a path string");
            return {};
        }
        std::filesystem::path p = obj[key].get<std::string>();
        return p.is_absolute() ? p : base_ / p;
    }

    template <class T>
    std::optional<T> number(const json &obj, const std::string &key, const std::string &where) {
        if (!obj.contains(key)) {
            return std::nullopt;
        }
        const auto &v = obj[key];
        if constexpr (std::is_same_v<T, std::uint64_t> || std::is_same_v<T, std::size_t>) {
            if (!v.is_number_unsigned()) {
                errors.push_back(where + key + ": expected a non-negative integer");
                return std::nullopt;
            }
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) {
                errors.push_back(where + key + ": expected an integer");
                return std::nullopt;
            }
        } else {
            if (!v.is_number()) {
                errors.push_back(where + key + ": expected a number");
                return std::nullopt;
            }
        }
        return v.get<T>();
    }

    const json &doc_;
    std::filesystem::path base_;
};

const json &object_or_empty(const json &doc, const std::string &key, Reader &r,
                            const std::string &where) {
    static const json empty = json::object();
    if (!doc.contains(key)) {
        return empty;
    }
    if (!doc[key].is_object()) {
        r.errors.push_back(where + key + ": expected an object");
        return empty;
    }
    return doc[key];
}

} // namespace

RunConfig parse_config(const json &doc, const std::filesystem::path &base_dir) {
    if (!doc.is_object()) {
        throw ValidationError({"config: expected a JSON object"});
    }
    Reader r(doc, base_dir);
    RunConfig cfg;
    r.only(doc, "", {"zones", "population", "rules", "wfh_table", "presets", "mode_specs",
                     "transit_spec", "network", "scenario", "policies", "grid",
                     "population_weight", "charging", "output_dir", "_comment"});

    cfg.zones = r.path(doc, "zones", "");
    cfg.rules = r.path(doc, "rules", "");
    cfg.wfh_table = r.path(doc, "wfh_table", "");
    cfg.presets = r.path(doc, "presets", "", false);
    cfg.mode_specs = r.path(doc, "mode_specs", "");
    cfg.transit_spec = r.path(doc, "transit_spec", "");
    cfg.network = r.path(doc, "network", "");
    cfg.output_dir = r.path(doc, "output_dir", "", false);
    if (cfg.output_dir.empty()) {
        cfg.output_dir = base_dir / "out";
    }

    const auto &pop = object_or_empty(doc, "population", r, "");
    if (!doc.contains("population")) {
        r.errors.push_back("population: required");
    }
    r.only(pop, "population.", {"file", "synthesis"});
    if (pop.contains("file") == pop.contains("synthesis")) {
        if (doc.contains("population")) {
            r.errors.push_back("population: give exactly one of 'file' or 'synthesis'");
        }
    } else if (pop.contains("file")) {
        cfg.population_file = r.path(pop, "file", "population.");
    } else {
        const auto &syn = object_or_empty(pop, "synthesis", r, "population.");
        r.only(syn, "population.synthesis.", {"params", "n", "seed"});
        SynthesisSource s;
        s.params = r.path(syn, "params", "population.synthesis.");
        s.n = r.number<std::size_t>(syn, "n", "population.synthesis.").value_or(0);
        s.seed = r.number<std::uint64_t>(syn, "seed", "population.synthesis.").value_or(0);
        if (!syn.contains("n")) {
            r.errors.push_back("population.synthesis.n: required");
        }
        cfg.synthesis = s;
    }

    const auto &scn = object_or_empty(doc, "scenario", r, "");
    r.only(scn, "scenario.", {"name", "preset", "weights", "wfh_level", "seed"});
    if (scn.contains("name")) {
        if (scn["name"].is_string()) {
            cfg.scenario_name = scn["name"].get<std::string>();
        } else {
            r.errors.push_back("scenario.name: expected a string");
        }
    }
    if (scn.contains("preset") && scn.contains("weights")) {
        r.errors.push_back("scenario: give either 'preset' or 'weights', not both");
    }
    if (scn.contains("preset")) {
        const auto p = scn["preset"].is_string() ? parse_preset(scn["preset"].get<std::string>())
                                                 : std::nullopt;
        if (!p) {
            r.errors.push_back("scenario.preset: expected one of Baseline2019, TransitFocused, "
                               "CarFocused, MicromobilityFocused, Mix");
        }
        cfg.preset = p;
    } else if (scn.contains("weights")) {
        try {
            cfg.weights = parse_weights(scn["weights"]);
            for (const auto &e : check_weights(*cfg.weights)) {
                r.errors.push_back("scenario.weights: " + e);
            }
        } catch (const ValidationError &e) {
            for (const auto &d : e.diagnostics()) {
                r.errors.push_back("scenario.weights: " + d);
            }
        }
    } else {
        cfg.preset = Preset::Mix;
    }
    if (scn.contains("wfh_level")) {
        const auto l = scn["wfh_level"].is_string()
                           ? parse_wfh_level(scn["wfh_level"].get<std::string>())
                           : std::nullopt;
        if (!l) {
            r.errors.push_back("scenario.wfh_level: expected one of High, Medium, Zero");
        } else {
            cfg.wfh_level = *l;
        }
    }
    cfg.seed = r.number<std::uint64_t>(scn, "seed", "scenario.").value_or(0);

    if (doc.contains("policies")) {
        cfg.policies.clear();
        if (!doc["policies"].is_array()) {
            r.errors.push_back("policies: expected an array");
        } else {
            for (const auto &p : doc["policies"]) {
                const auto pol = p.is_string() ? parse_policy(p.get<std::string>()) : std::nullopt;
                if (!pol) {
                    r.errors.push_back("policies: expected earliest, latest or distributed, got " +
                                       p.dump());
                } else if (std::find(cfg.policies.begin(), cfg.policies.end(), *pol) ==
                           cfg.policies.end()) {
                    cfg.policies.push_back(*pol);
                }
            }
            if (cfg.policies.empty() && doc["policies"].empty()) {
                r.errors.push_back("policies: must not be empty");
            }
        }
    }

    const auto &grid = object_or_empty(doc, "grid", r, "");
    r.only(grid, "grid.", {"lambda", "reserve_ratio"});
    cfg.lambda = r.number<double>(grid, "lambda", "grid.").value_or(0.0);
    cfg.reserve_ratio = r.number<double>(grid, "reserve_ratio", "grid.").value_or(0.0);
    if (!(cfg.lambda >= 0.0)) {
        r.errors.push_back("grid.lambda: must be >= 0");
    }
    if (!(cfg.reserve_ratio >= 0.0)) {
        r.errors.push_back("grid.reserve_ratio: must be >= 0");
    }

    cfg.population_weight = r.number<double>(doc, "population_weight", "").value_or(1.0);
    if (!(cfg.population_weight > 0.0)) {
        r.errors.push_back("population_weight: must be > 0");
    }

    const auto &ch = object_or_empty(doc, "charging", r, "");
    r.only(ch, "charging.", {"home_probability_single_family", "home_probability_apartment",
                             "travel_hours", "taxi_deadhead"});
    auto &c = cfg.charging;
    c.home_probability_single_family =
        r.number<double>(ch, "home_probability_single_family", "charging.")
            .value_or(c.home_probability_single_family);
    c.home_probability_apartment = r.number<double>(ch, "home_probability_apartment", "charging.")
                                       .value_or(c.home_probability_apartment);
    c.travel_hours = r.number<int>(ch, "travel_hours", "charging.").value_or(c.travel_hours);
    c.taxi_deadhead = r.number<double>(ch, "taxi_deadhead", "charging.").value_or(c.taxi_deadhead);
    for (double p : {c.home_probability_single_family, c.home_probability_apartment}) {
        if (!(p >= 0.0 && p <= 1.0)) {
            r.errors.push_back("charging: home probabilities must lie in [0, 1]");
            break;
        }
    }
    if (c.travel_hours < 0 || c.travel_hours > 6) {
        r.errors.push_back("charging.travel_hours: must be in 0..6");
    }
    if (!(c.taxi_deadhead >= 1.0)) {
        r.errors.push_back("charging.taxi_deadhead: must be >= 1");
    }

    if (!r.errors.empty()) {
        throw ValidationError(std::move(r.errors));
    }
    return cfg;
}

namespace {

json read_json(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw ValidationError({path.string() + ": " + e.what()});
    }
}

} // namespace

RunConfig load_config(const std::filesystem::path &path) {
    auto cfg = parse_config(read_json(path), path.parent_path());
    cfg.source = path;
    return cfg;
}

std::vector<std::string> validate_config(const std::filesystem::path &path) {
    std::vector<std::string> out;
    RunConfig cfg;
    try {
        cfg = load_config(path);
    } catch (const ValidationError &e) {
        return e.diagnostics();
    } catch (const Error &e) {
        return {e.what()};
    }

    // Loads each referenced document, collecting instead of throwing.
    const auto attempt = [&](const std::string &what, const std::filesystem::path &p,
                             const auto &body) {
        if (!std::filesystem::exists(p)) {
            out.push_back(what + ": path does not exist: " + p.string());
            return;
        }
        try {
            body();
        } catch (const ValidationError &e) {
            for (const auto &d : e.diagnostics()) {
                out.push_back(what + ": " + d);
            }
        } catch (const std::exception &e) {
            out.push_back(what + ": " + e.what());
        }
    };

    ZoneTable zones;
    bool zones_ok = false;
    attempt("zones", cfg.zones, [&] {
        zones = load_zones(cfg.zones);
        zones_ok = true;
    });
    if (cfg.population_file) {
        attempt("population", *cfg.population_file, [&] {
            if (zones_ok) {
                load_population(*cfg.population_file, zones);
            }
        });
    } else if (cfg.synthesis) {
        attempt("population.synthesis.params", cfg.synthesis->params, [&] {
            const auto params = load_synthesis_params(cfg.synthesis->params);
            if (zones_ok) {
                for (const auto *cat : {&params.home_zone, &params.work_zone}) {
                    for (const auto &z : cat->values) {
                        if (!zones.contains(z)) {
                            out.push_back("population.synthesis.params: unknown zone '" + z + "'");
                        }
                    }
                }
            }
        });
    }
    attempt("rules", cfg.rules, [&] {
        for (const auto &d : diagnose_rules(read_json(cfg.rules))) {
            out.push_back("rules: " + d);
        }
    });
    attempt("wfh_table", cfg.wfh_table, [&] { load_wfh_table(cfg.wfh_table); });
    if (!cfg.presets.empty()) {
        attempt("presets", cfg.presets, [&] { PresetTable::load(cfg.presets); });
    }
    attempt("mode_specs", cfg.mode_specs, [&] { load_mode_specs(cfg.mode_specs); });
    attempt("transit_spec", cfg.transit_spec, [&] { load_transit_spec(cfg.transit_spec); });
    attempt("network", cfg.network, [&] { load_network(cfg.network); });
    return out;
}

} // namespace evc
