#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "evc/exec.hpp"
#include "evc/network.hpp"
#include "evc/simplex.hpp"

namespace evc {

/// Per-hour decision vector: generator dispatch first, then the additional
/// load at each designated bus.
struct VariableLayout {
    std::size_t generator_count = 0;
    std::vector<std::size_t> designated; ///< bus index of each additional-load variable

    std::size_t size() const noexcept { return generator_count + designated.size(); }
    std::size_t additional(std::size_t k) const noexcept { return generator_count + k; }
};

/// One `coefficients . x <= rhs` row.
struct AuxRow {
    Eigen::VectorXd coefficients;
    double rhs = 0.0;
    std::string label;
};

/// Pluggable operational constraints on an hour's dispatch (the auxiliary
/// constraint stage). Rows are added to every hourly program and re-checked
/// by the audit.
class AuxConstraint {
  public:
    virtual ~AuxConstraint() = default;
    virtual std::vector<AuxRow> rows(const Network &net, int hour,
                                     const VariableLayout &layout) const = 0;
};

/// System-wide spinning reserve: sum(p_max - p) >= ratio * sum(d).
class ReserveMargin final : public AuxConstraint {
  public:
    explicit ReserveMargin(double ratio) : ratio_(ratio) {}
    std::vector<AuxRow> rows(const Network &net, int hour,
                             const VariableLayout &layout) const override;

  private:
    double ratio_;
};

struct GridOptions {
    double lambda = 0.0;         ///< weight of the relative-increase regulariser
    double reserve_ratio = 0.0;  ///< built-in ReserveMargin when > 0
    std::vector<std::shared_ptr<const AuxConstraint>> extra;
    Exec exec = Exec::Parallel;
};

struct HourSolution {
    int hour = 0;
    Eigen::VectorXd additional; ///< per bus, zero outside the designated set
    Eigen::VectorXd dispatch;   ///< per generator
    Eigen::VectorXd flows;      ///< per line, from -> to
    double total_additional_mw = 0.0;
    double objective = 0.0;
    std::vector<std::string> binding;
};

struct CapacityResult {
    double lambda = 0.0;
    double objective = 0.0;
    std::vector<HourSolution> hours;

    std::vector<double> total_additional_mw() const;
};

/// Builds hour `hour`'s linear program (lambda = 0 form).
lp::LinearProgram hour_program(const Network &net, const Eigen::MatrixXd &ptdf_matrix, int hour,
                               const GridOptions &opts, const VariableLayout &layout);

/// Maximises sum_t [ sum(a_t) - lambda * ||a_t / d_t||^2 ] subject to
/// balance, generator limits, flow limits and the auxiliary stage, with a
/// restricted to the designated buses. The program separates by hour; hours
/// are solved independently (in parallel with Exec::Parallel). lambda = 0 is
/// solved by simplex, lambda > 0 by the interior-point QP solver. Buses with
/// zero base load are left out of the regulariser. Throws GridError when the
/// base case (a = 0) is infeasible or the program is unbounded.
CapacityResult max_additional_load(const Network &net, int hours, const GridOptions &opts);

/// Additional load plus designated base load, per hour.
std::vector<double> capacity_envelope(const Network &net, const CapacityResult &result);

struct Envelope {
    CapacityResult result;
    std::vector<double> mw;
};

Envelope capacity_envelope(const Network &net, const GridOptions &opts);

/// Independent re-check of a solution: designated-only additional load,
/// a >= 0, balance, generator limits, flow limits (flows recomputed by a
/// direct angle solve), reported flows, auxiliary rows. Violations are
/// returned as messages; empty means feasible at `tol` (scaled by
/// max(1, |limit|)).
std::vector<std::string> audit_capacity_result(const Network &net, const CapacityResult &result,
                                               const GridOptions &opts, double tol = 1e-6);

nlohmann::json to_json(const Network &net, const CapacityResult &result);
void write_envelope_csv(const std::filesystem::path &path, const std::vector<double> &envelope,
                        const std::vector<double> &additional);

} // namespace evc
