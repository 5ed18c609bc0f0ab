#include "evc/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace evc {

ShareBreakdown shares(const Scenario &scn, const Population &pop, const ZoneTable &zones) {
    if (pop.empty()) {
        throw std::invalid_argument("shares: empty population");
    }
    if (scn.assignments.size() != pop.size()) {
        throw std::invalid_argument("shares: scenario does not match population");
    }
    std::array<double, kCategoryCount> trips{};
    std::array<double, kCategoryCount> distance{};
    for (std::size_t i = 0; i < pop.size(); ++i) {
        const auto cat = category_of(scn.assignments[i].mode);
        trips[index_of(cat)] += 1.0;
        if (cat != Category::WFH) {
            distance[index_of(cat)] += 2.0 * commute_distance(pop[i], zones);
        }
    }
    ShareBreakdown out;
    out.wfh_level = scn.wfh_level;
    const double n = static_cast<double>(pop.size());
    double total_distance = 0.0;
    for (double d : distance) {
        total_distance += d;
    }
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
        out.by_trips[c] = trips[c] / n;
        out.by_distance[c] = total_distance > 0.0 ? distance[c] / total_distance : out.by_trips[c];
    }
    return out;
}

std::map<std::string, std::array<double, kCategoryCount>>
zone_trip_shares(const Scenario &scn, const Population &pop) {
    if (scn.assignments.size() != pop.size()) {
        throw std::invalid_argument("zone_trip_shares: scenario does not match population");
    }
    std::map<std::string, std::array<double, kCategoryCount>> counts;
    std::map<std::string, double> totals;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        counts[pop[i].home_zone][index_of(category_of(scn.assignments[i].mode))] += 1.0;
        totals[pop[i].home_zone] += 1.0;
    }
    for (auto &[zone, row] : counts) {
        for (auto &v : row) {
            v /= totals[zone];
        }
    }
    return counts;
}

HeadroomReport headroom(const LoadProfile &profile, std::span<const double> capacity) {
    if (capacity.size() != static_cast<std::size_t>(kHours)) {
        throw std::invalid_argument("headroom: capacity needs 24 hourly values, got " +
                                    std::to_string(capacity.size()));
    }
    HeadroomReport r;
    r.profile = profile;
    std::copy(capacity.begin(), capacity.end(), r.capacity.begin());
    const auto &total = profile.total_mw;
    r.peak_hour = static_cast<int>(std::max_element(total.begin(), total.end()) - total.begin());
    r.peak_mw = total[static_cast<std::size_t>(r.peak_hour)];
    const double cap = r.capacity[static_cast<std::size_t>(r.peak_hour)];
    if (cap > 0.0) {
        r.utilization = r.peak_mw / cap;
    } else {
        r.utilization = r.peak_mw > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    for (int h = 0; h < kHours; ++h) {
        if (total[static_cast<std::size_t>(h)] > r.capacity[static_cast<std::size_t>(h)]) {
            r.exceeded_hours.push_back(h);
        }
    }
    return r;
}

namespace {

nlohmann::json by_category(const std::array<double, kCategoryCount> &v) {
    nlohmann::json out = nlohmann::json::object();
    for (auto c : kAllCategories) {
        out[std::string(to_string(c))] = v[index_of(c)];
    }
    return out;
}

} // namespace

nlohmann::json to_json(const ShareBreakdown &s) {
    return {{"wfh_level", to_string(s.wfh_level)},
            {"by_trips", by_category(s.by_trips)},
            {"by_distance", by_category(s.by_distance)}};
}

nlohmann::json to_json(const HeadroomReport &h) {
    nlohmann::json util = h.utilization;
    if (!std::isfinite(h.utilization)) {
        util = nullptr;
    }
    return {{"profile", to_json(h.profile)},
            {"capacity_mw", std::vector<double>(h.capacity.begin(), h.capacity.end())},
            {"peak_mw", h.peak_mw},
            {"peak_hour", h.peak_hour},
            {"utilization", util},
            {"exceeded_hours", h.exceeded_hours}};
}

nlohmann::json to_json(const std::map<std::string, std::array<double, kCategoryCount>> &zones) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto &[zone, row] : zones) {
        out[zone] = by_category(row);
    }
    return out;
}

std::string summary_table(const ShareBreakdown &s,
                          const std::vector<std::pair<ChargingPolicy, HeadroomReport>> &reports) {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-15s %10s %10s\n", "category", "trips", "distance");
    out += buf;
    for (auto c : kAllCategories) {
        std::snprintf(buf, sizeof buf, "%-15s %9.1f%% %9.1f%%\n", std::string(to_string(c)).c_str(),
                      100.0 * s.by_trips[index_of(c)], 100.0 * s.by_distance[index_of(c)]);
        out += buf;
    }
    out += '\n';
    std::snprintf(buf, sizeof buf, "%-12s %10s %6s %12s %10s %s\n", "policy", "peak_mw", "hour",
                  "capacity_mw", "util", "exceeded");
    out += buf;
    for (const auto &[policy, r] : reports) {
        std::string hours;
        for (int h : r.exceeded_hours) {
            hours += (hours.empty() ? "" : ",") + std::to_string(h);
        }
        std::snprintf(buf, sizeof buf, "%-12s %10.2f %6d %12.2f %9.1f%% %s\n",
                      std::string(to_string(policy)).c_str(), r.peak_mw, r.peak_hour,
                      r.capacity[static_cast<std::size_t>(r.peak_hour)], 100.0 * r.utilization,
                      hours.empty() ? "-" : hours.c_str());
        out += buf;
    }
    return out;
}

} // namespace evc
