// Acceptance run: one PASS/FAIL line per headline criterion. Exit status is
// non-zero when any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "evc/eligibility.hpp"
#include "evc/energy.hpp"
#include "evc/grid.hpp"
#include "evc/network.hpp"
#include "evc/pipeline.hpp"
#include "evc/report.hpp"
#include "evc/sampler.hpp"
#include "oracles/lp_oracle.hpp"
#include "oracles/peak_oracle.hpp"
#include "support.hpp"

using namespace evc;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(const std::string &name, const std::function<Verdict()> &check) {
    Verdict v;
    try {
        v = check();
    } catch (const std::exception &e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << name << ": " << v.detail << std::endl;
    failures += v.pass ? 0 : 1;
}

std::string fmt(const char *f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

GridOptions serial(double lambda) {
    GridOptions o;
    o.lambda = lambda;
    o.exec = Exec::Serial;
    return o;
}

std::vector<Network> random_networks(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Network> nets;
    for (std::size_t k = 0; k < count; ++k) {
        nets.push_back(support::random_network(rng, 2 + k % 9));
    }
    return nets;
}

std::uint64_t fnv1a(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char c;
    while (in.get(c)) {
        h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
    }
    return h;
}

Verdict oracle_equivalence() {
    double worst = 0.0;
    double slowest = 0.0;
    for (const auto *name : {"two_bus", "three_bus", "six_bus"}) {
        const auto net = load_network(support::network_dir(name));
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = max_additional_load(net, 24, serial(0.0));
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        slowest = std::max(slowest, secs);
        for (const auto &h : r.hours) {
            const auto ref = oracle::max_additional(net, h.hour);
            if (!ref) {
                return {false, std::string(name) + ": oracle found no feasible vertex"};
            }
            worst = std::max(worst, std::abs(h.total_additional_mw - *ref));
        }
    }
    return {worst <= 1e-4 && slowest < 5.0,
            fmt("2/3/6-bus, 24 h each, max |solver - oracle| = %.3g MW (tol 1e-4), slowest "
                "fixture %.3f s (limit 5 s)",
                worst, slowest)};
}

Verdict feasibility_audit() {
    std::size_t solutions = 0;
    std::size_t networks = 0;
    std::string first;
    auto nets = random_networks(60, 4242);
    for (const auto *name : {"one_bus", "two_bus", "three_bus", "symmetric_two_load", "six_bus"}) {
        nets.push_back(load_network(support::network_dir(name)));
    }
    for (const auto &net : nets) {
        ++networks;
        for (double lambda : {0.0, 0.1}) {
            const auto opts = serial(lambda);
            const auto r = max_additional_load(net, 24, opts);
            const auto issues = audit_capacity_result(net, r, opts, 1e-6);
            solutions += r.hours.size();
            if (!issues.empty() && first.empty()) {
                first = net.name + ": " + issues.front();
            }
        }
    }
    return {first.empty(),
            std::to_string(networks) + " networks (60 random, <= 10 buses), lambda 0 and 0.1, " +
                std::to_string(solutions) + " hourly solutions audited at 1e-6" +
                (first.empty() ? "" : "; first violation: " + first)};
}

Verdict ptdf_correctness() {
    double worst = 0.0;
    std::size_t checked = 0;
    auto nets = random_networks(20, 77);
    for (const auto *name : {"one_bus", "two_bus", "three_bus", "symmetric_two_load", "six_bus"}) {
        nets.push_back(load_network(support::network_dir(name)));
    }
    for (const auto &net : nets) {
        const auto r = max_additional_load(net, 24, serial(0.0));
        const Eigen::MatrixXd gen = net.generator_map();
        for (const auto &h : r.hours) {
            const Eigen::VectorXd injection = gen * h.dispatch - net.load(h.hour) - h.additional;
            const Eigen::VectorXd direct = direct_dc_flow(net, injection);
            if (direct.size() > 0) {
                worst = std::max(worst, (h.flows - direct).cwiseAbs().maxCoeff());
            }
            ++checked;
        }
    }
    return {worst <= 1e-8, fmt("%.0f hourly solutions on all fixtures and 20 random networks, "
                               "max |PTDF flow - direct angle solve| = %.3g MW (tol 1e-8)",
                               static_cast<double>(checked), worst)};
}

Verdict regularizer() {
    const auto net = load_network(support::network_dir("symmetric_two_load"));
    std::vector<double> spreads;
    for (double lambda : {0.0, 0.01, 0.1, 1.0}) {
        const auto r = max_additional_load(net, 24, serial(lambda));
        double worst = 0.0;
        for (const auto &h : r.hours) {
            const auto d = net.load(h.hour);
            worst = std::max(worst, std::abs(h.additional(1) / d(1) - h.additional(2) / d(2)));
        }
        spreads.push_back(worst);
    }
    bool ok = true;
    for (std::size_t k = 1; k < spreads.size(); ++k) {
        ok = ok && spreads[k] <= spreads[k - 1] + 1e-9;
    }
    std::string detail = "spread |a1/d1 - a2/d2| at lambda 0, 0.01, 0.1, 1:";
    for (double s : spreads) {
        detail += fmt(" %.3g", s);
    }
    return {ok, detail + " (non-increasing)"};
}

Verdict energy_conservation() {
    support::Bundled b(600, 5);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        WeightVector w;
        for (auto c : kAllCategories) {
            w[c] = u(rng) < 0.2 ? 0.0 : u(rng);
        }
        w[Category::Car] += 0.01;
        const auto level = std::array{WfhLevel::High, WfhLevel::Medium, WfhLevel::Zero}[trial % 3];
        const auto scn = build_scenario(b.scenario_inputs(), w, level, "random", rng());
        std::array<double, 3> kwh{};
        for (std::size_t p = 0; p < kAllPolicies.size(); ++p) {
            kwh[p] = scenario_demand(scn, b.energy_inputs(), b.transit, kAllPolicies[p])
                         .profile.daily_mwh() *
                     1000.0;
        }
        const auto [lo, hi] = std::minmax_element(kwh.begin(), kwh.end());
        worst = std::max(worst, *hi - *lo);
    }
    return {worst <= 1e-6, fmt("100 random scenarios, max daily spread across Earliest/Latest/"
                               "Distributed = %.3g kWh (tol 1e-6)",
                               worst)};
}

Verdict peak_ordering() {
    std::mt19937_64 rng(2024);
    int sets = 0;
    int violations = 0;
    double worst_ratio = 0.0;
    int small = 0;
    for (int trial = 0; trial < 600; ++trial) {
        const bool tiny = trial % 2 == 0;
        const int n = tiny ? std::uniform_int_distribution<int>(1, 8)(rng)
                           : std::uniform_int_distribution<int>(9, 300)(rng);
        std::vector<ChargeTask> tasks;
        for (int i = 0; i < n; ++i) {
            tasks.push_back(support::random_task(rng, i, tiny ? 8 : 16));
        }
        const auto peak = [&](ChargingPolicy p) {
            return schedule(tasks, p, Exec::Serial).peak_mw() * 1000.0;
        };
        const double d = peak(ChargingPolicy::Distributed);
        const double e = peak(ChargingPolicy::Earliest);
        const double l = peak(ChargingPolicy::Latest);
        ++sets;
        if (d > std::min(e, l) + 1e-9) {
            ++violations;
        }
        if (tiny) {
            ++small;
            worst_ratio = std::max(worst_ratio, d / oracle::minimal_peak(tasks));
        }
    }
    return {violations == 0 && worst_ratio <= 1.1,
            std::to_string(sets) + " random task sets, " + std::to_string(violations) +
                " with Distributed above min(Earliest, Latest); worst Distributed / brute-force "
                "peak over " +
                std::to_string(small) + " sets of <= 8 tasks = " + fmt("%.4f (limit 1.10)", worst_ratio)};
}

Verdict qualitative_ordering() {
    const auto cfg = load_config(demo_config_path());
    const auto data = load_datasets(cfg);
    std::map<Preset, double> peak;
    for (auto p : {Preset::CarFocused, Preset::Mix, Preset::TransitFocused,
                   Preset::MicromobilityFocused}) {
        ScenarioRequest req;
        req.preset = p;
        req.seed = cfg.seed;
        req.policies = {ChargingPolicy::Earliest};
        peak[p] = evaluate_scenario(data, req).demand.front().second.profile.peak_mw();
    }
    const bool ok = peak[Preset::CarFocused] > peak[Preset::Mix] &&
                    peak[Preset::Mix] > peak[Preset::TransitFocused] &&
                    peak[Preset::Mix] > peak[Preset::MicromobilityFocused];
    return {ok, std::to_string(data.population.size()) +
                    " individuals, Earliest peaks (MW): " +
                    fmt("CarFocused %.0f > Mix %.0f > TransitFocused %.0f", peak[Preset::CarFocused],
                        peak[Preset::Mix], peak[Preset::TransitFocused]) +
                    fmt(", Mix > MicromobilityFocused %.0f", peak[Preset::MicromobilityFocused])};
}

Verdict sampler_statistics() {
    // Two eligible modes for everyone: every other mode is closed off by rule.
    support::Bundled b(100000, 11);
    RuleSet two;
    for (auto m : kAllModes) {
        EligibilityRule r;
        r.mode = m;
        if (m != Mode::Subway && m != Mode::PrivateEV) {
            r.min_age = 200;
        }
        two.set(r);
    }
    const ScenarioInputs in{b.population, b.zones, two, b.wfh, b.charging};
    WeightVector w;
    w.w = {1.0, 1.0, 1.0, 1.0};
    const auto scn = build_scenario(in, w, WfhLevel::Zero, "even", 1);
    double car = 0.0;
    for (const auto &a : scn.assignments) {
        car += a.mode == Mode::PrivateEV;
    }
    const double share = car / static_cast<double>(scn.assignments.size());

    // Zero-weight category on the full rule set.
    w.w = {1.0, 0.0, 1.0, 1.0};
    const auto no_car = build_scenario(b.scenario_inputs(), w, WfhLevel::High, "nocar", 2);
    std::size_t drawn = 0;
    for (const auto &a : no_car.assignments) {
        drawn += category_of(a.mode) == Category::Car;
    }

    // Full-pipeline determinism through the CLI.
    bool identical = true;
    std::size_t files = 0;
    const auto a = support::scratch_dir("acceptance_demo_a");
    const auto z = support::scratch_dir("acceptance_demo_b");
    for (const auto &dir : {a, z}) {
        const std::string cmd =
            std::string("\"") + EVC_CLI_PATH + "\" demo --quiet --out \"" + dir.string() + "\"";
        const int status = std::system(cmd.c_str());
        if (status != 0) {
            return {false, "demo run failed: " + cmd};
        }
    }
    for (const auto &entry : std::filesystem::directory_iterator(a)) {
        ++files;
        identical = identical && fnv1a(entry.path()) == fnv1a(z / entry.path().filename());
    }
    const bool ok = std::abs(share - 0.5) <= 0.01 && drawn == 0 && identical && files > 0;
    return {ok, fmt("equal weights over 1e5 individuals: PrivateEV share %.4f (0.5 +- 0.01); ",
                    share) +
                    std::to_string(drawn) + " zero-weight draws; " + std::to_string(files) +
                    " demo files " + (identical ? "hash-identical" : "DIFFER") + " across two runs"};
}

Verdict eligibility_boundaries() {
    const ZoneTable zones({support::zone("A", 0, 0, RegionTag::Queens, true),
                           support::zone("B", 24.0, 0, RegionTag::Manhattan, true),
                           support::zone("C", 24.01, 0, RegionTag::Manhattan, true),
                           support::zone("D", 5.0, 0, RegionTag::Manhattan, true)});
    const auto rules = load_rules(support::kData / "rules.json");
    const auto ok = [&](int age, const char *work) {
        return eligible_set(support::person(1, "A", work, age), rules, zones).contains(Mode::EBike);
    };
    const bool a70 = ok(70, "D");
    const bool a71 = ok(71, "D");
    const bool d24 = ok(30, "B");
    const bool d2401 = ok(30, "C");
    const auto yn = [](bool v) { return v ? std::string("eligible") : std::string("ineligible"); };
    return {a70 && !a71 && d24 && !d2401, "EBike age 70 " + yn(a70) + ", 71 " + yn(a71) +
                                               "; 24.0 km " + yn(d24) + ", 24.01 km " + yn(d2401)};
}

Verdict share_accounting() {
    support::Bundled b(10000, 2019);
    double worst = 0.0;
    int runs = 0;
    for (auto p : kAllPresets) {
        for (auto level : {WfhLevel::High, WfhLevel::Medium, WfhLevel::Zero}) {
            const auto scn = scenario_from_preset(b.scenario_inputs(), b.presets, p, level, 42);
            const auto s = shares(scn, b.population, b.zones);
            worst = std::max(worst, std::abs(std::accumulate(s.by_trips.begin(), s.by_trips.end(), 0.0) - 1.0));
            worst = std::max(worst, std::abs(std::accumulate(s.by_distance.begin(), s.by_distance.end(), 0.0) - 1.0));
            ++runs;
        }
    }
    const auto pop = load_population(support::kData / "long_car_trips.csv", b.zones);
    const ScenarioInputs in{pop, b.zones, b.rules, b.wfh, b.charging};
    const auto scn = baseline_scenario(in, WfhLevel::Medium, "long car trips", 1);
    const auto s = shares(scn, pop, b.zones);
    const double trips = s.by_trips[index_of(Category::Car)];
    const double dist = s.by_distance[index_of(Category::Car)];
    return {worst <= 1e-9 && dist > trips,
            std::to_string(runs) + fmt(" preset runs, max |sum - 1| = %.2g (tol 1e-9); long-car-trip "
                                       "fixture: car distance share %.3f > trip share %.3f",
                                       worst, dist, trips)};
}

} // namespace

int main() {
    report("Oracle equivalence (grid)", oracle_equivalence);
    report("Feasibility audit", feasibility_audit);
    report("PTDF correctness", ptdf_correctness);
    report("Regularizer behavior", regularizer);
    report("Energy conservation", energy_conservation);
    report("Peak ordering", peak_ordering);
    report("Qualitative ordering", qualitative_ordering);
    report("Sampler statistics", sampler_statistics);
    report("Eligibility boundaries", eligibility_boundaries);
    report("Share accounting", share_accounting);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
