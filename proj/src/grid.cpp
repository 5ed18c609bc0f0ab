#include "evc/grid.hpp"

#include <cmath>
#include <exception>
#include <limits>

#include "evc/csv.hpp"
#include "evc/error.hpp"
#include "evc/interior_point.hpp"

namespace evc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Index ix(std::size_t i) { return static_cast<Index>(i); }

double limit_tol(double tol, double limit) { return tol * std::max(1.0, std::abs(limit)); }

std::string line_label(const Network &net, std::size_t k) {
    const auto &l = net.lines[k];
    return net.buses[l.from].id + "-" + net.buses[l.to].id;
}

/// Maps the designated additional-load variables onto buses (buses x k).
MatrixXd additional_map(const Network &net, const VariableLayout &layout) {
    MatrixXd e = MatrixXd::Zero(ix(net.buses.size()), ix(layout.designated.size()));
    for (std::size_t k = 0; k < layout.designated.size(); ++k) {
        e(ix(layout.designated[k]), ix(k)) = 1.0;
    }
    return e;
}

std::vector<AuxRow> aux_rows(const Network &net, int hour, const GridOptions &opts,
                             const VariableLayout &layout) {
    std::vector<AuxRow> rows;
    if (opts.reserve_ratio > 0.0) {
        rows = ReserveMargin(opts.reserve_ratio).rows(net, hour, layout);
    }
    for (const auto &c : opts.extra) {
        auto more = c->rows(net, hour, layout);
        rows.insert(rows.end(), more.begin(), more.end());
    }
    return rows;
}

VariableLayout layout_of(const Network &net) {
    return VariableLayout{net.generators.size(), net.designated()};
}

struct HourWork {
    HourSolution solution;
    std::exception_ptr error;
};

HourSolution solve_hour(const Network &net, const MatrixXd &b, int hour, const GridOptions &opts,
                        const VariableLayout &layout) {
    auto lp = hour_program(net, b, hour, opts, layout);
    const auto ng = ix(layout.generator_count);
    const auto na = ix(layout.designated.size());

    // Base case: no additional load at all.
    auto base = lp;
    base.objective.setZero();
    base.upper.tail(na).setZero();
    const auto base_sol = lp::solve_simplex(base);
    if (base_sol.status != lp::Status::Optimal) {
        throw GridError("network " + net.name + ", hour " + std::to_string(hour) +
                        ": base case without additional load is infeasible");
    }

    const auto lin = lp::solve_simplex(lp);
    if (lin.status == lp::Status::Unbounded) {
        throw GridError("network " + net.name + ", hour " + std::to_string(hour) +
                        ": additional load is unbounded (no binding limit)");
    }
    if (lin.status != lp::Status::Optimal) {
        throw GridError("network " + net.name + ", hour " + std::to_string(hour) +
                        ": linear program failed (" + lp::to_string(lin.status) + ")");
    }

    const VectorXd d = net.load(hour);
    VectorXd x = lin.x;
    if (opts.lambda > 0.0) {
        // minimise -sum(a) + lambda * sum((a_j / d_j)^2) over the same region
        qp::QuadraticProgram q;
        const auto n = lp.variables();
        q.hessian = MatrixXd::Zero(n, n);
        q.linear = -lp.objective;
        for (Index k = 0; k < na; ++k) {
            const double dj = d(ix(layout.designated[static_cast<std::size_t>(k)]));
            if (dj > 0.0) {
                q.hessian(ng + k, ng + k) = 2.0 * opts.lambda / (dj * dj);
            }
        }
        q.a_eq = lp.a_eq;
        q.b_eq = lp.b_eq;
        std::vector<std::pair<VectorXd, double>> bounds;
        for (Index j = 0; j < n; ++j) {
            VectorXd row = VectorXd::Zero(n);
            row(j) = -1.0;
            bounds.emplace_back(row, -lp.lower(j));
            if (std::isfinite(lp.upper(j))) {
                row(j) = 1.0;
                bounds.emplace_back(row, lp.upper(j));
            }
        }
        q.g.resize(lp.a_ub.rows() + ix(bounds.size()), n);
        q.h.resize(q.g.rows());
        q.g.topRows(lp.a_ub.rows()) = lp.a_ub;
        q.h.head(lp.a_ub.rows()) = lp.b_ub;
        for (std::size_t k = 0; k < bounds.size(); ++k) {
            q.g.row(lp.a_ub.rows() + ix(k)) = bounds[k].first.transpose();
            q.h(lp.a_ub.rows() + ix(k)) = bounds[k].second;
        }
        const auto qs = qp::solve_interior_point(q);
        if (qs.status != qp::Status::Optimal) {
            throw GridError("network " + net.name + ", hour " + std::to_string(hour) +
                            ": regularised program did not converge (residual " +
                            std::to_string(qs.max_residual) + ", gap " + std::to_string(qs.gap) +
                            " after " + std::to_string(qs.iterations) + " iterations)");
        }
        x = qs.x;
    }

    HourSolution out;
    out.hour = hour;
    out.dispatch = x.head(ng);
    for (Index j = 0; j < ng; ++j) {
        const auto &g = net.generators[static_cast<std::size_t>(j)];
        out.dispatch(j) = std::clamp(out.dispatch(j), g.p_min_mw, g.p_max_mw);
    }
    out.additional = VectorXd::Zero(ix(net.buses.size()));
    double penalty = 0.0;
    for (Index k = 0; k < na; ++k) {
        const auto bus = ix(layout.designated[static_cast<std::size_t>(k)]);
        const double a = std::max(0.0, x(ng + k));
        out.additional(bus) = a;
        if (d(bus) > 0.0) {
            penalty += (a / d(bus)) * (a / d(bus));
        }
    }
    out.total_additional_mw = out.additional.sum();
    out.objective = out.total_additional_mw - opts.lambda * penalty;
    const VectorXd injection = net.generator_map() * out.dispatch - d - out.additional;
    out.flows = b * injection;

    const double tol = 1e-6;
    for (std::size_t k = 0; k < net.lines.size(); ++k) {
        const double cap = net.lines[k].capacity_mw;
        const double f = out.flows(ix(k));
        if (std::isfinite(cap) && std::abs(std::abs(f) - cap) <= limit_tol(tol, cap)) {
            out.binding.push_back("line " + line_label(net, k) +
                                  (f >= 0.0 ? " forward limit" : " reverse limit"));
        }
    }
    for (std::size_t k = 0; k < net.generators.size(); ++k) {
        const auto &g = net.generators[k];
        const double p = out.dispatch(ix(k));
        const auto label = "generator " + std::to_string(k) + " at " + net.buses[g.bus].id;
        if (std::isfinite(g.p_max_mw) && std::abs(p - g.p_max_mw) <= limit_tol(tol, g.p_max_mw)) {
            out.binding.push_back(label + " p_max");
        } else if (std::abs(p - g.p_min_mw) <= limit_tol(tol, g.p_min_mw)) {
            out.binding.push_back(label + " p_min");
        }
    }
    VectorXd xv(layout.size());
    xv.head(ng) = out.dispatch;
    for (Index k = 0; k < na; ++k) {
        xv(ng + k) = out.additional(ix(layout.designated[static_cast<std::size_t>(k)]));
    }
    for (const auto &row : aux_rows(net, hour, opts, layout)) {
        if (std::abs(row.coefficients.dot(xv) - row.rhs) <= limit_tol(tol, row.rhs)) {
            out.binding.push_back(row.label);
        }
    }
    return out;
}

} // namespace

std::vector<AuxRow> ReserveMargin::rows(const Network &net, int hour,
                                        const VariableLayout &layout) const {
    double capacity = 0.0;
    for (const auto &g : net.generators) {
        capacity += g.p_max_mw;
    }
    if (!std::isfinite(capacity)) {
        return {}; // unlimited generation always meets the margin
    }
    AuxRow row;
    row.coefficients = VectorXd::Zero(ix(layout.size()));
    row.coefficients.head(ix(layout.generator_count)).setOnes();
    row.rhs = capacity - ratio_ * net.load(hour).sum();
    row.label = "reserve margin";
    return {row};
}

std::vector<double> CapacityResult::total_additional_mw() const {
    std::vector<double> out;
    out.reserve(hours.size());
    for (const auto &h : hours) {
        out.push_back(h.total_additional_mw);
    }
    return out;
}

lp::LinearProgram hour_program(const Network &net, const MatrixXd &b, int hour,
                               const GridOptions &opts, const VariableLayout &layout) {
    const auto ng = ix(layout.generator_count);
    const auto na = ix(layout.designated.size());
    const auto n = ng + na;
    const VectorXd d = net.load(hour);

    lp::LinearProgram lp;
    lp.objective = VectorXd::Zero(n);
    lp.objective.tail(na).setOnes();
    lp.lower = VectorXd::Zero(n);
    lp.upper = VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    for (Index j = 0; j < ng; ++j) {
        const auto &g = net.generators[static_cast<std::size_t>(j)];
        lp.lower(j) = g.p_min_mw;
        lp.upper(j) = g.p_max_mw;
    }

    lp.a_eq = MatrixXd::Zero(1, n);
    lp.a_eq.leftCols(ng).setOnes();
    lp.a_eq.rightCols(na).setConstant(-1.0);
    lp.b_eq = VectorXd::Constant(1, d.sum());

    // flows = B (M p - d - E a), limited to +-capacity
    const MatrixXd bm = b * net.generator_map();
    const MatrixXd be = b * additional_map(net, layout);
    const VectorXd bd = b * d;
    std::vector<std::pair<VectorXd, double>> rows;
    for (std::size_t k = 0; k < net.lines.size(); ++k) {
        const double cap = net.lines[k].capacity_mw;
        if (!std::isfinite(cap)) {
            continue;
        }
        VectorXd coeff(n);
        coeff.head(ng) = bm.row(ix(k)).transpose();
        coeff.tail(na) = -be.row(ix(k)).transpose();
        rows.emplace_back(coeff, cap + bd(ix(k)));
        rows.emplace_back(-coeff, cap - bd(ix(k)));
    }
    for (auto &row : aux_rows(net, hour, opts, layout)) {
        if (row.coefficients.size() != n) {
            throw std::invalid_argument("auxiliary constraint row has the wrong width");
        }
        rows.emplace_back(row.coefficients, row.rhs);
    }
    lp.a_ub.resize(ix(rows.size()), n);
    lp.b_ub.resize(ix(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        lp.a_ub.row(ix(r)) = rows[r].first.transpose();
        lp.b_ub(ix(r)) = rows[r].second;
    }
    return lp;
}

CapacityResult max_additional_load(const Network &net, int hours, const GridOptions &opts) {
    if (hours < 1 || hours > 24) {
        throw std::invalid_argument("max_additional_load: horizon must be 1..24 hours");
    }
    if (!(opts.lambda >= 0.0) || !std::isfinite(opts.lambda)) {
        throw std::invalid_argument("max_additional_load: lambda must be finite and >= 0");
    }
    if (!(opts.reserve_ratio >= 0.0)) {
        throw std::invalid_argument("max_additional_load: reserve ratio must be >= 0");
    }
    const MatrixXd b = ptdf(net);
    const auto layout = layout_of(net);
    std::vector<HourWork> work(static_cast<std::size_t>(hours));
    const auto body = [&](int t) {
        auto &w = work[static_cast<std::size_t>(t)];
        try {
            w.solution = solve_hour(net, b, t, opts, layout);
        } catch (...) {
            w.error = std::current_exception();
        }
    };
    if (opts.exec == Exec::Serial) {
        for (int t = 0; t < hours; ++t) {
            body(t);
        }
    } else {
#pragma omp parallel for schedule(dynamic)
        for (int t = 0; t < hours; ++t) {
            body(t);
        }
    }
    CapacityResult result;
    result.lambda = opts.lambda;
    for (auto &w : work) {
        if (w.error) {
            std::rethrow_exception(w.error);
        }
        result.objective += w.solution.objective;
        result.hours.push_back(std::move(w.solution));
    }
    return result;
}

std::vector<double> capacity_envelope(const Network &net, const CapacityResult &result) {
    const auto designated = net.designated();
    std::vector<double> out;
    for (const auto &h : result.hours) {
        double base = 0.0;
        for (auto i : designated) {
            base += net.buses[i].load_mw[static_cast<std::size_t>(h.hour)];
        }
        out.push_back(h.total_additional_mw + base);
    }
    return out;
}

Envelope capacity_envelope(const Network &net, const GridOptions &opts) {
    Envelope e;
    e.result = max_additional_load(net, 24, opts);
    e.mw = capacity_envelope(net, e.result);
    return e;
}

std::vector<std::string> audit_capacity_result(const Network &net, const CapacityResult &result,
                                               const GridOptions &opts, double tol) {
    std::vector<std::string> issues;
    const auto layout = layout_of(net);
    const auto nb = ix(net.buses.size());
    const auto ng = ix(net.generators.size());
    const auto nl = ix(net.lines.size());
    for (const auto &h : result.hours) {
        const auto where = "hour " + std::to_string(h.hour) + ": ";
        if (h.additional.size() != nb || h.dispatch.size() != ng || h.flows.size() != nl) {
            issues.push_back(where + "solution has the wrong dimensions");
            continue;
        }
        const VectorXd d = net.load(h.hour);
        for (Index i = 0; i < nb; ++i) {
            const double a = h.additional(i);
            if (!net.buses[static_cast<std::size_t>(i)].designated && a != 0.0) {
                issues.push_back(where + "additional load at non-designated bus " +
                                 net.buses[static_cast<std::size_t>(i)].id);
            }
            if (a < -tol) {
                issues.push_back(where + "negative additional load at bus " +
                                 net.buses[static_cast<std::size_t>(i)].id);
            }
        }
        const double supply = h.dispatch.sum();
        const double demand = d.sum() + h.additional.sum();
        if (std::abs(supply - demand) > limit_tol(tol, demand)) {
            issues.push_back(where + "power balance off by " + csv::format_number(supply - demand));
        }
        for (Index k = 0; k < ng; ++k) {
            const auto &g = net.generators[static_cast<std::size_t>(k)];
            const double p = h.dispatch(k);
            if (p < g.p_min_mw - limit_tol(tol, g.p_min_mw) ||
                p > g.p_max_mw + limit_tol(tol, g.p_max_mw)) {
                issues.push_back(where + "generator " + std::to_string(k) + " outside its limits");
            }
        }
        VectorXd injection = -d - h.additional;
        for (Index k = 0; k < ng; ++k) {
            injection(ix(net.generators[static_cast<std::size_t>(k)].bus)) += h.dispatch(k);
        }
        const VectorXd flows = direct_dc_flow(net, injection);
        for (Index k = 0; k < nl; ++k) {
            const double cap = net.lines[static_cast<std::size_t>(k)].capacity_mw;
            if (std::abs(flows(k)) > cap + limit_tol(tol, cap)) {
                issues.push_back(where + "line " + line_label(net, static_cast<std::size_t>(k)) +
                                 " over capacity");
            }
            if (std::abs(flows(k) - h.flows(k)) > limit_tol(tol, flows(k))) {
                issues.push_back(where + "reported flow on line " +
                                 line_label(net, static_cast<std::size_t>(k)) +
                                 " disagrees with the direct solve");
            }
        }
        VectorXd x(ix(layout.size()));
        x.head(ng) = h.dispatch;
        for (std::size_t k = 0; k < layout.designated.size(); ++k) {
            x(ng + ix(k)) = h.additional(ix(layout.designated[k]));
        }
        for (const auto &row : aux_rows(net, h.hour, opts, layout)) {
            if (row.coefficients.dot(x) > row.rhs + limit_tol(tol, row.rhs)) {
                issues.push_back(where + row.label + " violated");
            }
        }
    }
    return issues;
}

nlohmann::json to_json(const Network &net, const CapacityResult &result) {
    const auto vec = [](const VectorXd &v) {
        return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
    };
    nlohmann::json buses = nlohmann::json::array();
    for (const auto &b : net.buses) {
        buses.push_back(b.id);
    }
    nlohmann::json lines = nlohmann::json::array();
    for (std::size_t k = 0; k < net.lines.size(); ++k) {
        lines.push_back(line_label(net, k));
    }
    nlohmann::json designated = nlohmann::json::array();
    for (auto i : net.designated()) {
        designated.push_back(net.buses[i].id);
    }
    nlohmann::json hours = nlohmann::json::array();
    for (const auto &h : result.hours) {
        hours.push_back({{"hour", h.hour},
                         {"total_additional_mw", h.total_additional_mw},
                         {"objective", h.objective},
                         {"additional_mw", vec(h.additional)},
                         {"dispatch_mw", vec(h.dispatch)},
                         {"flows_mw", vec(h.flows)},
                         {"binding", h.binding}});
    }
    return {{"network", net.name},
            {"lambda", result.lambda},
            {"objective", result.objective},
            {"buses", buses},
            {"lines", lines},
            {"designated_buses", designated},
            {"hours", hours}};
}

void write_envelope_csv(const std::filesystem::path &path, const std::vector<double> &envelope,
                        const std::vector<double> &additional) {
    if (envelope.size() != additional.size()) {
        throw std::invalid_argument("write_envelope_csv: length mismatch");
    }
    std::vector<std::string> lines{"hour,additional_mw,capacity_mw"};
    for (std::size_t h = 0; h < envelope.size(); ++h) {
        lines.push_back(std::to_string(h) + ',' + csv::format_number(additional[h]) + ',' +
                        csv::format_number(envelope[h]));
    }
    csv::write_lines(path, lines);
}

} // namespace evc
