#include "evc/network.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "evc/csv.hpp"
#include "evc/error.hpp"

namespace evc {

std::size_t Network::bus_index(std::string_view id) const {
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (buses[i].id == id) {
            return i;
        }
    }
    throw GridError("unknown bus '" + std::string(id) + "' in network " + name);
}

std::vector<std::size_t> Network::designated() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (buses[i].designated) {
            out.push_back(i);
        }
    }
    return out;
}

Eigen::VectorXd Network::load(int hour) const {
    Eigen::VectorXd d(static_cast<Eigen::Index>(buses.size()));
    for (std::size_t i = 0; i < buses.size(); ++i) {
        d(static_cast<Eigen::Index>(i)) = buses[i].load_mw.at(static_cast<std::size_t>(hour));
    }
    return d;
}

Eigen::MatrixXd Network::generator_map() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(buses.size()),
                                              static_cast<Eigen::Index>(generators.size()));
    for (std::size_t k = 0; k < generators.size(); ++k) {
        m(static_cast<Eigen::Index>(generators[k].bus), static_cast<Eigen::Index>(k)) = 1.0;
    }
    return m;
}

std::vector<std::vector<std::size_t>> connected_components(const Network &net) {
    std::vector<std::size_t> parent(net.buses.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    const auto find = [&](std::size_t v) {
        while (parent[v] != v) {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    };
    for (const auto &l : net.lines) {
        if (l.from < parent.size() && l.to < parent.size()) {
            auto a = find(l.from);
            auto b = find(l.to);
            if (a != b) {
                parent[std::max(a, b)] = std::min(a, b);
            }
        }
    }
    std::vector<std::vector<std::size_t>> groups;
    std::unordered_map<std::size_t, std::size_t> slot;
    for (std::size_t v = 0; v < parent.size(); ++v) {
        const auto root = find(v);
        auto [it, fresh] = slot.emplace(root, groups.size());
        if (fresh) {
            groups.emplace_back();
        }
        groups[it->second].push_back(v);
    }
    return groups;
}

void validate_network(const Network &net) {
    const auto fail = [&](const std::string &msg) {
        throw GridError("network " + (net.name.empty() ? std::string("<unnamed>") : net.name) +
                        ": " + msg);
    };
    if (net.buses.empty()) {
        fail("no buses");
    }
    if (net.slack >= net.buses.size()) {
        fail("slack bus out of range");
    }
    std::set<std::string> ids;
    for (const auto &b : net.buses) {
        if (!ids.insert(b.id).second) {
            fail("duplicate bus id '" + b.id + "'");
        }
        for (double d : b.load_mw) {
            if (!std::isfinite(d)) {
                fail("bus " + b.id + " has a non-finite load");
            }
        }
    }
    for (std::size_t k = 0; k < net.lines.size(); ++k) {
        const auto &l = net.lines[k];
        const auto label = "line " + std::to_string(k);
        if (l.from >= net.buses.size() || l.to >= net.buses.size()) {
            fail(label + " references an unknown bus");
        }
        if (l.from == l.to) {
            fail(label + " is a self-loop");
        }
        if (!(l.susceptance > 0.0) || !std::isfinite(l.susceptance)) {
            fail(label + " needs a positive finite susceptance");
        }
        if (!(l.capacity_mw > 0.0)) {
            fail(label + " needs a positive capacity");
        }
    }
    for (std::size_t k = 0; k < net.generators.size(); ++k) {
        const auto &g = net.generators[k];
        const auto label = "generator " + std::to_string(k);
        if (g.bus >= net.buses.size()) {
            fail(label + " references an unknown bus");
        }
        if (!std::isfinite(g.p_min_mw) || std::isnan(g.p_max_mw) || g.p_min_mw > g.p_max_mw) {
            fail(label + " needs finite p_min <= p_max");
        }
    }
    const auto groups = connected_components(net);
    if (groups.size() > 1) {
        std::string msg = "network is disconnected; components:";
        for (const auto &grp : groups) {
            msg += " {";
            for (std::size_t i = 0; i < grp.size(); ++i) {
                msg += (i ? "," : "") + net.buses[grp[i]].id;
            }
            msg += "}";
        }
        fail(msg);
    }
}

namespace {

double parse_real(const std::string &text, const std::filesystem::path &file, std::size_t row,
                  std::string_view field, std::vector<std::string> &errors) {
    if (text == "inf" || text == "Inf" || text == "+inf") {
        return std::numeric_limits<double>::infinity();
    }
    try {
        std::size_t pos = 0;
        double v = std::stod(text, &pos);
        if (pos == text.size() && std::isfinite(v)) {
            return v;
        }
    } catch (const std::exception &) {
    }
    errors.push_back(file.string() + ": row " + std::to_string(row) + ", field " +
                     std::string(field) + ": not a number ('" + text + "')");
    return 0.0;
}

} // namespace

Network load_network(const std::filesystem::path &dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw Error("network directory not found: " + dir.string());
    }
    Network net;
    std::vector<std::string> errors;

    const auto meta_path = dir / "meta.json";
    std::ifstream meta_in(meta_path);
    if (!meta_in) {
        throw Error("cannot open " + meta_path.string());
    }
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(meta_in);
    } catch (const nlohmann::json::parse_error &e) {
        throw ValidationError({meta_path.string() + ": " + e.what()});
    }
    net.name = meta.value("name", dir.filename().string());
    if (!meta.contains("slack_bus")) {
        throw ValidationError({meta_path.string() + ": missing slack_bus"});
    }
    const auto slack_id = meta["slack_bus"].is_string() ? meta["slack_bus"].get<std::string>()
                                                        : meta["slack_bus"].dump();

    const auto buses_path = dir / "buses.csv";
    const auto buses = csv::read(buses_path);
    const auto c_id = buses.column("id");
    const auto c_flag = buses.column("is_manhattan");
    std::array<std::size_t, 24> c_load{};
    for (int h = 0; h < 24; ++h) {
        c_load[static_cast<std::size_t>(h)] = buses.column("load_mw_h" + std::to_string(h));
    }
    for (const auto &row : buses.rows) {
        if (row.fields.size() != buses.header.size()) {
            errors.push_back(buses_path.string() + ": row " + std::to_string(row.index) +
                             ": wrong field count");
            continue;
        }
        Bus b;
        b.id = row.fields[c_id];
        for (int h = 0; h < 24; ++h) {
            const auto c = c_load[static_cast<std::size_t>(h)];
            b.load_mw[static_cast<std::size_t>(h)] =
                parse_real(row.fields[c], buses_path, row.index, buses.header[c], errors);
        }
        const auto &flag = row.fields[c_flag];
        if (flag != "0" && flag != "1") {
            errors.push_back(buses_path.string() + ": row " + std::to_string(row.index) +
                             ", field is_manhattan: expected 0 or 1");
        }
        b.designated = flag == "1";
        net.buses.push_back(std::move(b));
    }

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < net.buses.size(); ++i) {
        index.emplace(net.buses[i].id, i);
    }
    const auto lookup = [&](const std::string &id, const std::filesystem::path &file,
                            std::size_t row, std::string_view field) -> std::size_t {
        auto it = index.find(id);
        if (it == index.end()) {
            errors.push_back(file.string() + ": row " + std::to_string(row) + ", field " +
                             std::string(field) + ": unknown bus '" + id + "'");
            return 0;
        }
        return it->second;
    };

    const auto lines_path = dir / "lines.csv";
    const auto lines = csv::read(lines_path);
    const auto c_from = lines.column("from");
    const auto c_to = lines.column("to");
    const auto c_b = lines.column("susceptance");
    const auto c_cap = lines.column("capacity_mw");
    for (const auto &row : lines.rows) {
        if (row.fields.size() != lines.header.size()) {
            errors.push_back(lines_path.string() + ": row " + std::to_string(row.index) +
                             ": wrong field count");
            continue;
        }
        Line l;
        l.from = lookup(row.fields[c_from], lines_path, row.index, "from");
        l.to = lookup(row.fields[c_to], lines_path, row.index, "to");
        l.susceptance = parse_real(row.fields[c_b], lines_path, row.index, "susceptance", errors);
        l.capacity_mw = parse_real(row.fields[c_cap], lines_path, row.index, "capacity_mw", errors);
        net.lines.push_back(l);
    }

    const auto gens_path = dir / "generators.csv";
    const auto gens = csv::read(gens_path);
    const auto c_bus = gens.column("bus");
    const auto c_min = gens.column("p_min_mw");
    const auto c_max = gens.column("p_max_mw");
    for (const auto &row : gens.rows) {
        if (row.fields.size() != gens.header.size()) {
            errors.push_back(gens_path.string() + ": row " + std::to_string(row.index) +
                             ": wrong field count");
            continue;
        }
        Generator g;
        g.bus = lookup(row.fields[c_bus], gens_path, row.index, "bus");
        g.p_min_mw = parse_real(row.fields[c_min], gens_path, row.index, "p_min_mw", errors);
        g.p_max_mw = parse_real(row.fields[c_max], gens_path, row.index, "p_max_mw", errors);
        net.generators.push_back(g);
    }

    auto slack = index.find(slack_id);
    if (slack == index.end()) {
        errors.push_back(meta_path.string() + ": slack_bus '" + slack_id + "' is not a bus");
    } else {
        net.slack = slack->second;
    }
    if (!errors.empty()) {
        throw ValidationError(std::move(errors));
    }
    validate_network(net);
    return net;
}

namespace {

/// Susceptance Laplacian with the slack row and column removed; `reduced`
/// maps bus index to position (or -1 for the slack).
Eigen::MatrixXd reduced_laplacian(const Network &net, std::vector<Eigen::Index> &reduced) {
    const auto n = net.buses.size();
    reduced.assign(n, -1);
    Eigen::Index k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i != net.slack) {
            reduced[i] = k++;
        }
    }
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(k, k);
    for (const auto &l : net.lines) {
        const auto f = reduced[l.from];
        const auto t = reduced[l.to];
        if (f >= 0) {
            lap(f, f) += l.susceptance;
        }
        if (t >= 0) {
            lap(t, t) += l.susceptance;
        }
        if (f >= 0 && t >= 0) {
            lap(f, t) -= l.susceptance;
            lap(t, f) -= l.susceptance;
        }
    }
    return lap;
}

} // namespace

Eigen::MatrixXd ptdf(const Network &net) {
    validate_network(net);
    std::vector<Eigen::Index> reduced;
    const auto lap = reduced_laplacian(net, reduced);
    const Eigen::LLT<Eigen::MatrixXd> llt(lap);
    if (llt.info() != Eigen::Success) {
        throw GridError("network " + net.name + ": susceptance matrix is singular");
    }
    const Eigen::MatrixXd x = llt.solve(Eigen::MatrixXd::Identity(lap.rows(), lap.cols()));

    const auto n = static_cast<Eigen::Index>(net.buses.size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(net.lines.size()), n);
    for (std::size_t li = 0; li < net.lines.size(); ++li) {
        const auto &l = net.lines[li];
        const auto row = static_cast<Eigen::Index>(li);
        for (std::size_t b = 0; b < net.buses.size(); ++b) {
            const auto rb = reduced[b];
            if (rb < 0) {
                continue;
            }
            const double theta_f = reduced[l.from] >= 0 ? x(reduced[l.from], rb) : 0.0;
            const double theta_t = reduced[l.to] >= 0 ? x(reduced[l.to], rb) : 0.0;
            out(row, static_cast<Eigen::Index>(b)) = l.susceptance * (theta_f - theta_t);
        }
    }
    return out;
}

Eigen::VectorXd direct_dc_flow(const Network &net, const Eigen::VectorXd &injection) {
    if (injection.size() != static_cast<Eigen::Index>(net.buses.size())) {
        throw std::invalid_argument("direct_dc_flow: injection size mismatch");
    }
    std::vector<Eigen::Index> reduced;
    const auto lap = reduced_laplacian(net, reduced);
    Eigen::VectorXd p(lap.rows());
    for (std::size_t b = 0; b < net.buses.size(); ++b) {
        if (reduced[b] >= 0) {
            p(reduced[b]) = injection(static_cast<Eigen::Index>(b));
        }
    }
    const Eigen::VectorXd theta =
        lap.rows() == 0 ? Eigen::VectorXd() : Eigen::VectorXd(lap.colPivHouseholderQr().solve(p));
    const auto angle = [&](std::size_t b) { return reduced[b] >= 0 ? theta(reduced[b]) : 0.0; };
    Eigen::VectorXd flows(static_cast<Eigen::Index>(net.lines.size()));
    for (std::size_t li = 0; li < net.lines.size(); ++li) {
        const auto &l = net.lines[li];
        flows(static_cast<Eigen::Index>(li)) = l.susceptance * (angle(l.from) - angle(l.to));
    }
    return flows;
}

} // namespace evc
