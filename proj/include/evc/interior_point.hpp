#pragma once

#include <Eigen/Dense>

namespace evc::qp {

/// minimize 0.5 x'Hx + c'x  s.t.  A x = b,  G x <= h.   H must be PSD.
struct QuadraticProgram {
    Eigen::MatrixXd hessian;
    Eigen::VectorXd linear;
    Eigen::MatrixXd a_eq;
    Eigen::VectorXd b_eq;
    Eigen::MatrixXd g;
    Eigen::VectorXd h;
};

enum class Status { Optimal, NotConverged };

struct Solution {
    Status status = Status::NotConverged;
    Eigen::VectorXd x;
    double objective = 0.0;
    int iterations = 0;
    double max_residual = 0.0;
    double gap = 0.0;
};

struct InteriorPointOptions {
    /// Primal residual, dual residual and gap, relative to the data scale.
    double tolerance = 1e-10;
    /// Dual residual accepted once the gap has vanished and the point is
    /// primal feasible; degenerate optimal faces can stall there.
    double acceptable_dual_residual = 1e-6;
    int max_iterations = 200;
};

/// Primal-dual path-following method with Mehrotra predictor-corrector.
/// Handles H = 0 (plain LP) as well as strictly convex problems.
Solution solve_interior_point(const QuadraticProgram &qp, const InteriorPointOptions &opts = {});

} // namespace evc::qp
