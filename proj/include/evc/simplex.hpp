#pragma once

#include <Eigen/Dense>

namespace evc::lp {

/// maximize c'x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  lower <= x <= upper.
/// Lower bounds must be finite; upper bounds may be +inf.
struct LinearProgram {
    Eigen::VectorXd objective;
    Eigen::MatrixXd a_ub;
    Eigen::VectorXd b_ub;
    Eigen::MatrixXd a_eq;
    Eigen::VectorXd b_eq;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    Eigen::Index variables() const noexcept { return objective.size(); }
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

const char *to_string(Status s) noexcept;

struct Solution {
    Status status = Status::IterationLimit;
    Eigen::VectorXd x;
    double objective = 0.0;
    int iterations = 0;
};

struct SimplexOptions {
    double tolerance = 1e-9;
    int max_iterations = 50000;
};

/// Dense two-phase tableau simplex. Dantzig pricing, switching to Bland's
/// rule after a run of degenerate pivots so the method cannot cycle.
Solution solve_simplex(const LinearProgram &lp, const SimplexOptions &opts = {});

} // namespace evc::lp
