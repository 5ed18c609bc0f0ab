#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "evc/energy.hpp"
#include "evc/modes.hpp"
#include "evc/population.hpp"
#include "evc/sampler.hpp"

namespace evc {

struct ShareBreakdown {
    std::array<double, kCategoryCount> by_trips{};
    std::array<double, kCategoryCount> by_distance{};
    WfhLevel wfh_level = WfhLevel::Medium;
};

/// Trip shares count individuals per category; distance shares weight each
/// by round-trip commute distance, WFH with zero weight. If the scenario has
/// no travel distance at all, distance shares equal trip shares. Throws
/// std::invalid_argument for an empty population.
ShareBreakdown shares(const Scenario &scn, const Population &pop, const ZoneTable &zones);

/// Trip shares per home zone, for the map panel.
std::map<std::string, std::array<double, kCategoryCount>>
zone_trip_shares(const Scenario &scn, const Population &pop);

struct HeadroomReport {
    LoadProfile profile;
    Hourly capacity{};
    double peak_mw = 0.0;
    int peak_hour = 0;
    double utilization = 0.0; ///< peak / capacity at the peak hour
    std::vector<int> exceeded_hours;
};

/// Throws std::invalid_argument unless capacity has 24 entries.
HeadroomReport headroom(const LoadProfile &profile, std::span<const double> capacity);

nlohmann::json to_json(const ShareBreakdown &s);
nlohmann::json to_json(const HeadroomReport &h);
nlohmann::json to_json(const std::map<std::string, std::array<double, kCategoryCount>> &zones);

/// Fixed-width text table for the CLI.
std::string summary_table(const ShareBreakdown &s,
                          const std::vector<std::pair<ChargingPolicy, HeadroomReport>> &reports);

} // namespace evc
