#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "evc/eligibility.hpp"
#include "evc/energy.hpp"
#include "evc/error.hpp"
#include "evc/grid.hpp"
#include "evc/network.hpp"
#include "evc/population.hpp"
#include "evc/sampler.hpp"

namespace support {

inline const std::filesystem::path kData = EVC_DATA_DIR;
inline const std::filesystem::path kConfig = EVC_CONFIG_DIR;

inline std::filesystem::path network_dir(const std::string &name) {
    return kData / "networks" / name;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string &name) {
    auto dir = std::filesystem::temp_directory_path() / ("evc_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Demo config rewritten with absolute paths and `n` synthetic individuals,
/// saved as dir/config.json with output under dir/out.
inline std::filesystem::path small_config(const std::filesystem::path &dir, std::size_t n,
                                          const std::string &network = "six_bus") {
    auto doc = nlohmann::json::parse(std::ifstream(kData / "demo" / "config.json"));
    doc["zones"] = (kData / "zones.csv").string();
    doc["population"]["synthesis"]["params"] = (kData / "synthesis.json").string();
    doc["population"]["synthesis"]["n"] = n;
    doc["rules"] = (kData / "rules.json").string();
    doc["wfh_table"] = (kData / "wfh_table.json").string();
    doc["presets"] = (kConfig / "presets.json").string();
    doc["mode_specs"] = (kData / "mode_specs.csv").string();
    doc["transit_spec"] = (kData / "transit.json").string();
    doc["network"] = network_dir(network).string();
    doc["output_dir"] = (dir / "out").string();
    const auto path = dir / "config.json";
    std::ofstream(path) << doc.dump(2);
    return path;
}

inline evc::Zone zone(std::string id, double x, double y,
                      evc::RegionTag region = evc::RegionTag::Queens, bool bike = true) {
    evc::Zone z;
    z.id = std::move(id);
    z.centroid_x_km = x;
    z.centroid_y_km = y;
    z.region = region;
    z.bike_accessible = bike;
    return z;
}

inline evc::Individual person(std::int64_t id, std::string home, std::string work, int age = 30) {
    evc::Individual ind;
    ind.id = id;
    ind.age = age;
    ind.home_zone = std::move(home);
    ind.work_zone = std::move(work);
    return ind;
}

/// Bundled reference data with a synthetic population of `n` individuals.
struct Bundled {
    evc::ZoneTable zones = evc::load_zones(kData / "zones.csv");
    evc::RuleSet rules = evc::load_rules(kData / "rules.json");
    evc::WfhTable wfh = evc::load_wfh_table(kData / "wfh_table.json");
    evc::ChargingOptions charging;
    evc::ModeSpecTable specs = evc::load_mode_specs(kData / "mode_specs.csv");
    evc::TransitSpec transit = evc::load_transit_spec(kData / "transit.json");
    evc::PresetTable presets = evc::PresetTable::load(kConfig / "presets.json");
    evc::Population population;

    explicit Bundled(std::size_t n = 2000, std::uint64_t seed = 2019)
        : population(evc::synthesize_population(
              n, evc::load_synthesis_params(kData / "synthesis.json"), seed)) {}

    evc::ScenarioInputs scenario_inputs() const {
        return {population, zones, rules, wfh, charging};
    }
    evc::EnergyInputs energy_inputs() const { return {population, zones, specs, charging}; }
};

inline evc::ChargeTask task(double kwh, double kw, int start, int end, std::int64_t id = 1) {
    evc::ChargeTask t;
    t.individual_id = id;
    t.mode = evc::Mode::PrivateEV;
    t.energy_kwh = kwh;
    t.power_kw = kw;
    t.window_start = start;
    t.window_end = end;
    return t;
}

/// Random feasible task (energy <= power * window).
inline evc::ChargeTask random_task(std::mt19937_64 &rng, std::int64_t id, int max_window = 12) {
    std::uniform_int_distribution<int> start(0, 23);
    std::uniform_int_distribution<int> len(1, max_window);
    std::uniform_real_distribution<double> power(1.0, 20.0);
    std::uniform_real_distribution<double> fill(0.05, 1.0);
    const int s = start(rng);
    const int l = len(rng);
    const double p = power(rng);
    const int dur = std::uniform_int_distribution<int>(1, l)(rng);
    const double e = p * (dur - 1 + fill(rng));
    auto t = task(e, p, s, (s + l) % 24, id);
    const std::array<evc::Mode, 4> modes{evc::Mode::PrivateEV, evc::Mode::EBike, evc::Mode::Taxi,
                                         evc::Mode::Bus};
    t.mode = modes[static_cast<std::size_t>(id) % modes.size()];
    return t;
}

/// Random connected network of `n` buses whose base case is feasible.
/// Loads vary by hour; generators have finite limits so the program is bounded.
inline evc::Network random_network(std::mt19937_64 &rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    while (true) {
        evc::Network net;
        net.name = "random-" + std::to_string(n);
        for (std::size_t i = 0; i < n; ++i) {
            evc::Bus b;
            b.id = "b" + std::to_string(i + 1);
            const double base = 5.0 + 60.0 * u(rng);
            for (int h = 0; h < 24; ++h) {
                b.load_mw[static_cast<std::size_t>(h)] = base * (0.7 + 0.3 * u(rng));
            }
            net.buses.push_back(b);
        }
        // spanning tree plus a few chords
        for (std::size_t i = 1; i < n; ++i) {
            const auto j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
            net.lines.push_back({j, i, 1.0 + 9.0 * u(rng), 40.0 + 160.0 * u(rng)});
        }
        const std::size_t chords = std::uniform_int_distribution<std::size_t>(0, n)(rng);
        for (std::size_t c = 0; c < chords && n > 2; ++c) {
            auto a = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
            auto b = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
            if (a != b) {
                net.lines.push_back({a, b, 1.0 + 9.0 * u(rng), 40.0 + 160.0 * u(rng)});
            }
        }
        const std::size_t gens = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(3, n))(rng);
        for (std::size_t g = 0; g < gens; ++g) {
            const auto bus = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
            net.generators.push_back({bus, 0.0, 80.0 + 300.0 * u(rng)});
        }
        const std::size_t designated =
            std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(3, n))(rng);
        for (std::size_t k = 0; k < designated; ++k) {
            net.buses[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)].designated = true;
        }
        net.slack = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        try {
            evc::GridOptions probe;
            probe.exec = evc::Exec::Serial;
            evc::max_additional_load(net, 24, probe);
            return net;
        } catch (const evc::GridError &) {
            // base case infeasible; draw again
        }
    }
}

} // namespace support
