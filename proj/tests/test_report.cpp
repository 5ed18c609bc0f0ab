#include <doctest.h>

#include <numeric>

#include "evc/report.hpp"
#include "support.hpp"

using namespace evc;

namespace {

double total(const std::array<double, kCategoryCount> &v) {
    return std::accumulate(v.begin(), v.end(), 0.0);
}

Scenario assign(const Population &pop, Mode m) {
    Scenario s;
    for (const auto &ind : pop) {
        s.assignments.push_back({ind.id, m, ChargeLocation::None});
    }
    return s;
}

/// Ten commuters: two drive 30 km, eight ride transit 3 km.
struct LongCarTrips {
    ZoneTable zones{{support::zone("HOME", 0, 0), support::zone("NEAR", 3, 0),
                     support::zone("FAR", 30, 0)}};
    Population pop;
    Scenario scn;

    LongCarTrips() {
        for (int i = 1; i <= 10; ++i) {
            const bool car = i <= 2;
            pop.push_back(support::person(i, "HOME", car ? "FAR" : "NEAR"));
            scn.assignments.push_back(
                {i, car ? Mode::PrivateEV : Mode::Subway,
                 car ? ChargeLocation::Home : ChargeLocation::None});
        }
    }
};

} // namespace

TEST_SUITE("report") {

TEST_CASE("long car trips weigh more by distance than by trips") {
    LongCarTrips f;
    const auto s = shares(f.scn, f.pop, f.zones);
    CHECK(s.by_trips[index_of(Category::Car)] == doctest::Approx(0.2));
    CHECK(s.by_distance[index_of(Category::Car)] == doctest::Approx(60.0 / 84.0));
    CHECK(s.by_distance[index_of(Category::Car)] > s.by_trips[index_of(Category::Car)]);
    CHECK(std::abs(total(s.by_trips) - 1.0) <= 1e-9);
    CHECK(std::abs(total(s.by_distance) - 1.0) <= 1e-9);
}

TEST_CASE("WFH counts as a trip share but carries no distance") {
    LongCarTrips f;
    f.scn.assignments[9].mode = Mode::WFH;
    const auto s = shares(f.scn, f.pop, f.zones);
    CHECK(s.by_trips[index_of(Category::WFH)] == doctest::Approx(0.1));
    CHECK(s.by_distance[index_of(Category::WFH)] == 0.0);
}

TEST_CASE("all-WFH scenario falls back to trip shares for distance") {
    LongCarTrips f;
    const auto s = shares(assign(f.pop, Mode::WFH), f.pop, f.zones);
    CHECK(s.by_trips[index_of(Category::WFH)] == 1.0);
    CHECK(s.by_distance == s.by_trips);
}

TEST_CASE("empty population is rejected") {
    CHECK_THROWS_AS(shares(Scenario{}, Population{}, ZoneTable{}), std::invalid_argument);
}

TEST_CASE("shares sum to one on every preset run") {
    support::Bundled b(5000);
    for (auto p : kAllPresets) {
        for (auto level : {WfhLevel::High, WfhLevel::Medium, WfhLevel::Zero}) {
            const auto scn = scenario_from_preset(b.scenario_inputs(), b.presets, p, level, 3);
            const auto s = shares(scn, b.population, b.zones);
            CHECK(std::abs(total(s.by_trips) - 1.0) <= 1e-9);
            CHECK(std::abs(total(s.by_distance) - 1.0) <= 1e-9);
            for (std::size_t c = 0; c < kCategoryCount; ++c) {
                CHECK((s.by_trips[c] >= 0.0 && s.by_trips[c] <= 1.0));
                CHECK((s.by_distance[c] >= 0.0 && s.by_distance[c] <= 1.0));
            }
            CHECK(s.wfh_level == level);
        }
    }
}

TEST_CASE("zone trip shares sum to one per zone") {
    support::Bundled b(3000);
    const auto scn = scenario_from_preset(b.scenario_inputs(), b.presets, Preset::Mix,
                                          WfhLevel::Medium, 3);
    const auto z = zone_trip_shares(scn, b.population);
    CHECK(z.size() == 20);
    for (const auto &[id, row] : z) {
        CHECK(std::abs(total(row) - 1.0) <= 1e-9);
    }
}

TEST_CASE("headroom finds the peak and the exceeded hours") {
    LoadProfile p;
    for (int h = 0; h < kHours; ++h) {
        p.add(Category::Car, h, h == 18 ? 120.0 : 50.0);
    }
    p.add(Category::Transit, 7, 70.0);
    p.finalize();
    std::vector<double> cap(24, 100.0);
    cap[7] = 110.0;
    const auto r = headroom(p, cap);
    CHECK(r.peak_hour == 7);
    CHECK(r.peak_mw == doctest::Approx(120.0));
    CHECK(r.utilization == doctest::Approx(120.0 / 110.0));
    CHECK(r.exceeded_hours == std::vector<int>{7, 18});
    CHECK_THROWS_AS(headroom(p, std::vector<double>(23, 1.0)), std::invalid_argument);
}

TEST_CASE("zero capacity gives unbounded utilization, serialised as null") {
    LoadProfile p;
    p.add(Category::Car, 3, 1.0);
    p.finalize();
    const auto r = headroom(p, std::vector<double>(24, 0.0));
    CHECK(std::isinf(r.utilization));
    CHECK(to_json(r)["utilization"].is_null());
}

TEST_CASE("serialised shares use category names") {
    LongCarTrips f;
    const auto j = to_json(shares(f.scn, f.pop, f.zones));
    CHECK(j["by_trips"]["Car"].get<double>() == doctest::Approx(0.2));
    CHECK(j["by_distance"].contains("Micromobility"));
    CHECK(j["wfh_level"] == "Medium");
}

TEST_CASE("summary table lists every category and policy") {
    LongCarTrips f;
    LoadProfile p;
    p.add(Category::Car, 9, 5.0);
    p.finalize();
    const auto text = summary_table(shares(f.scn, f.pop, f.zones),
                                    {{ChargingPolicy::Earliest, headroom(p, std::vector(24, 10.0))}});
    for (const auto *word : {"Transit", "Car", "Micromobility", "WFH", "earliest"}) {
        CHECK(text.find(word) != std::string::npos);
    }
}

} // TEST_SUITE
