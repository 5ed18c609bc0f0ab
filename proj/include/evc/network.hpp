#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace evc {

struct Bus {
    std::string id;
    std::array<double, 24> load_mw{}; ///< base load per hour
    bool designated = false;          ///< additional load allowed here (Manhattan set)
};

struct Line {
    std::size_t from = 0;
    std::size_t to = 0;
    double susceptance = 1.0;
    double capacity_mw = 0.0;
};

struct Generator {
    std::size_t bus = 0;
    double p_min_mw = 0.0;
    double p_max_mw = 0.0; ///< may be +inf
};

struct Network {
    std::string name;
    std::vector<Bus> buses;
    std::vector<Line> lines;
    std::vector<Generator> generators;
    std::size_t slack = 0;

    std::size_t bus_index(std::string_view id) const;
    /// Indices of designated buses, ascending.
    std::vector<std::size_t> designated() const;
    /// Base load vector at an hour.
    Eigen::VectorXd load(int hour) const;
    /// Generator-to-bus incidence (buses x generators).
    Eigen::MatrixXd generator_map() const;
};

/// Connected components as lists of bus indices (ascending, by first member).
std::vector<std::vector<std::size_t>> connected_components(const Network &net);

/// Throws GridError on an invalid network: disconnected (naming the
/// components), bad slack, non-positive capacity, p_min > p_max, zero
/// susceptance, self-loops.
void validate_network(const Network &net);

/// Reads buses.csv, lines.csv, generators.csv and meta.json from a directory.
Network load_network(const std::filesystem::path &dir);

/// Power transfer distribution factors (lines x buses): flow on each line for
/// 1 MW injected at a bus and withdrawn at the slack. Slack column is zero.
Eigen::MatrixXd ptdf(const Network &net);

/// Line flows for a balanced injection vector by solving the reduced DC
/// system for bus angles directly (no PTDF).
Eigen::VectorXd direct_dc_flow(const Network &net, const Eigen::VectorXd &injection);

} // namespace evc
