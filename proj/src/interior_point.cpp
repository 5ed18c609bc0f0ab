#include "evc/interior_point.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>
#include <stdexcept>

namespace evc::qp {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Fraction of the distance to the boundary taken per step. Values closer to 1
// can make the iterates cycle between two nearly active constraints.
constexpr double kToBoundary = 0.95;

/// Largest step in (0, 1] keeping v + step * dv >= 0.
double max_step(const VectorXd &v, const VectorXd &dv) {
    double a = 1.0;
    for (Index i = 0; i < v.size(); ++i) {
        if (dv(i) < 0.0) {
            a = std::min(a, -v(i) / dv(i));
        }
    }
    return a;
}

double inf_norm(const VectorXd &v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

/// Holds the constraints in `active` as equalities, solves the resulting KKT
/// system for the smallest correction to `near`, and returns the point only
/// when it meets every optimality condition within `tol`. Anchoring at the
/// interior iterate matters when the optimum is not unique.
std::optional<VectorXd> polish(const QuadraticProgram &qp, const MatrixXd &a, const MatrixXd &g,
                               const std::vector<Index> &active, const VectorXd &near,
                               double tol) {
    const Index n = qp.linear.size();
    const Index p = a.rows();
    const Index k = static_cast<Index>(active.size());
    MatrixXd kkt = MatrixXd::Zero(n + p + k, n + p + k);
    VectorXd rhs(n + p + k);
    kkt.topLeftCorner(n, n) = qp.hessian;
    if (p > 0) {
        kkt.block(0, n, n, p) = a.transpose();
        kkt.block(n, 0, p, n) = a;
    }
    rhs.head(n) = -qp.linear;
    rhs.segment(n, p) = qp.b_eq;
    for (Index j = 0; j < k; ++j) {
        kkt.block(0, n + p + j, n, 1) = g.row(active[j]).transpose();
        kkt.block(n + p + j, 0, 1, n) = g.row(active[j]);
        rhs(n + p + j) = qp.h(active[j]);
    }
    VectorXd anchor = VectorXd::Zero(n + p + k);
    anchor.head(n) = near;
    VectorXd v = kkt.completeOrthogonalDecomposition().solve(rhs - kkt * anchor);
    v.head(n) += near;
    if (!v.allFinite() || inf_norm(kkt * v - rhs) > tol) {
        return std::nullopt;
    }
    const VectorXd x = v.head(n);
    if (g.rows() > 0 && (g * x - qp.h).maxCoeff() > tol) {
        return std::nullopt;
    }
    if (k > 0 && v.tail(k).minCoeff() < -tol) {
        return std::nullopt;
    }
    return x;
}

/// Drops inequality rows without effective coefficients, scales the rest to unit norm
/// and merges rows that coincide after scaling, keeping the tightest bound.
/// Returns nullopt when a dropped row is violated on its own.
std::optional<QuadraticProgram> presolve(const QuadraticProgram &qp) {
    QuadraticProgram out = qp;
    std::vector<VectorXd> rows;
    std::vector<double> bounds;
    double largest = 0.0;
    for (Index i = 0; i < qp.g.rows(); ++i) {
        largest = std::max(largest, qp.g.row(i).norm());
    }
    for (Index i = 0; i < qp.g.rows(); ++i) {
        const double norm = qp.g.row(i).norm();
        // rows of pure round-off (flows no decision variable can move)
        if (norm <= 1e-12 * largest) {
            if (qp.h(i) < 0.0) {
                return std::nullopt;
            }
            continue;
        }
        const VectorXd row = qp.g.row(i).transpose() / norm;
        const double bound = qp.h(i) / norm;
        bool merged = false;
        for (std::size_t k = 0; k < rows.size() && !merged; ++k) {
            if ((rows[k] - row).cwiseAbs().maxCoeff() <= 1e-12) {
                bounds[k] = std::min(bounds[k], bound);
                merged = true;
            }
        }
        if (!merged) {
            rows.push_back(row);
            bounds.push_back(bound);
        }
    }
    out.g.resize(static_cast<Index>(rows.size()), qp.linear.size());
    out.h.resize(static_cast<Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.g.row(static_cast<Index>(k)) = rows[k].transpose();
        out.h(static_cast<Index>(k)) = bounds[k];
    }
    return out;
}

Solution solve_presolved(const QuadraticProgram &qp, const InteriorPointOptions &opts) {
    const Index n = qp.linear.size();
    const Index p = qp.a_eq.rows();
    const Index m = qp.g.rows();
    const MatrixXd a = p > 0 ? qp.a_eq : MatrixXd(0, n);
    const MatrixXd g = m > 0 ? qp.g : MatrixXd(0, n);

    const double data_scale =
        1.0 + std::max({inf_norm(qp.linear), inf_norm(qp.b_eq), inf_norm(qp.h)});

    Solution sol;
    MatrixXd kkt(n + p, n + p);
    VectorXd rhs(n + p);

    // Starting point: least-squares solve with unit scaling, then slacks and
    // multipliers shifted into the positive orthant.
    kkt.setZero();
    kkt.topLeftCorner(n, n) = qp.hessian + g.transpose() * g;
    kkt.topLeftCorner(n, n).diagonal().array() += 1e-13;
    if (p > 0) {
        kkt.topRightCorner(n, p) = a.transpose();
        kkt.bottomLeftCorner(p, n) = a;
    }
    rhs.head(n) = -qp.linear + g.transpose() * qp.h;
    rhs.tail(p) = qp.b_eq;
    const VectorXd start = Eigen::PartialPivLU<MatrixXd>(kkt).solve(rhs);
    VectorXd x = start.head(n);
    VectorXd y = start.tail(p);
    VectorXd s = qp.h - g * x;
    VectorXd z = -s;
    const auto shift = [](VectorXd &v) {
        if (v.size() == 0) {
            return;
        }
        const double low = v.minCoeff();
        if (low <= 0.0) {
            v.array() += 1.0 - low;
        }
    };
    shift(s);
    shift(z);

    for (int it = 0; it < opts.max_iterations; ++it) {
        const VectorXd r_d = qp.hessian * x + qp.linear + a.transpose() * y + g.transpose() * z;
        const VectorXd r_p = a * x - qp.b_eq;
        const VectorXd r_i = g * x + s - qp.h;
        const double mu = m > 0 ? s.dot(z) / static_cast<double>(m) : 0.0;

        sol.iterations = it;
        sol.max_residual = std::max({inf_norm(r_d), inf_norm(r_p), inf_norm(r_i)});
        sol.gap = mu;
        if (sol.max_residual <= opts.tolerance * data_scale && mu <= opts.tolerance * data_scale) {
            sol.status = Status::Optimal;
            break;
        }
        // The multiplier recovery loses precision as slacks vanish, which can
        // stall or even degrade the dual residual near the end. Once the gap
        // is small, an exact solve on the identified active set finishes the
        // job whenever it certifies.
        const double loose = std::sqrt(opts.tolerance) * data_scale;
        if (m > 0 && mu <= loose && sol.max_residual <= loose) {
            // candidate active sets: constraints ranked by slack over
            // multiplier, taking the strictly active ones plus a few more
            std::vector<Index> ranked(static_cast<std::size_t>(m));
            std::iota(ranked.begin(), ranked.end(), Index{0});
            std::stable_sort(ranked.begin(), ranked.end(), [&](Index i, Index j) {
                return s(i) * z(j) < s(j) * z(i);
            });
            const auto strict = static_cast<std::size_t>((z.array() > s.array()).count());
            constexpr std::size_t kExtra = 6;
            std::optional<VectorXd> polished;
            for (std::size_t k = strict; k <= std::min(ranked.size(), strict + kExtra) && !polished;
                 ++k) {
                std::vector<Index> active(ranked.begin(), ranked.begin() + static_cast<long>(k));
                polished = polish(qp, a, g, active, x, 1e-9 * data_scale);
            }
            if (polished) {
                x = *polished;
                sol.status = Status::Optimal;
                break;
            }
        }
        if (mu <= 1e-6 * opts.tolerance * data_scale) {
            // complementarity is exhausted; a primal-feasible point whose dual
            // residual stalled within the acceptable bound is still a solution
            if (std::max(inf_norm(r_p), inf_norm(r_i)) <= opts.tolerance * data_scale &&
                inf_norm(r_d) <= opts.acceptable_dual_residual * data_scale) {
                sol.status = Status::Optimal;
            }
            break;
        }

        const VectorXd w = z.cwiseQuotient(s);
        kkt.setZero();
        kkt.topLeftCorner(n, n) = qp.hessian + g.transpose() * w.asDiagonal() * g;
        if (p > 0) {
            kkt.topRightCorner(n, p) = a.transpose();
            kkt.bottomLeftCorner(p, n) = a;
        }
        // factor a slightly regularised copy and refine against the exact matrix
        MatrixXd regularised = kkt;
        const double diag = n > 0 ? kkt.topLeftCorner(n, n).diagonal().cwiseAbs().maxCoeff() : 0.0;
        regularised.topLeftCorner(n, n).diagonal().array() += 1e-13 * std::max(1.0, diag);
        const Eigen::PartialPivLU<MatrixXd> lu(regularised);
        const auto solve_kkt = [&](const VectorXd &b) {
            VectorXd v = lu.solve(b);
            for (int r = 0; r < 3; ++r) {
                v += lu.solve(b - kkt * v);
            }
            return v;
        };

        // Solves the reduced Newton system for a complementarity target r_sz.
        const auto direction = [&](const VectorXd &r_sz, VectorXd &dx, VectorXd &dy,
                                   VectorXd &ds, VectorXd &dz) {
            rhs.head(n) = -r_d + g.transpose() * (r_sz - z.cwiseProduct(r_i)).cwiseQuotient(s);
            rhs.tail(p) = -r_p;
            const VectorXd sol_xy = solve_kkt(rhs);
            dx = sol_xy.head(n);
            dy = sol_xy.tail(p);
            ds = -r_i - g * dx;
            dz = (-r_sz - z.cwiseProduct(ds)).cwiseQuotient(s);
        };

        VectorXd dx, dy, ds, dz;
        const VectorXd sz = s.cwiseProduct(z);
        direction(sz, dx, dy, ds, dz);
        const double a_aff = std::min(max_step(s, ds), max_step(z, dz));
        double sigma = 0.0;
        if (m > 0) {
            const double mu_aff =
                (s + a_aff * ds).dot(z + a_aff * dz) / static_cast<double>(m);
            sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);
        }
        const VectorXd corrected =
            sz + ds.cwiseProduct(dz) - VectorXd::Constant(m, sigma * mu);
        direction(corrected, dx, dy, ds, dz);
        const auto step_of = [&] {
            return std::min(1.0, kToBoundary * std::min(max_step(s, ds), max_step(z, dz)));
        };
        double step = step_of();

        // The second-order correction occasionally raises complementarity
        // instead of lowering it; a plain centred step is safe there.
        if (m > 0) {
            const double mu_next =
                (s + step * ds).dot(z + step * dz) / static_cast<double>(m);
            if (!(mu_next < mu)) {
                direction(sz - VectorXd::Constant(m, std::max(sigma, 0.1) * mu), dx, dy, ds, dz);
                step = step_of();
            }
        }

        if (!dx.allFinite() || !dy.allFinite() || !ds.allFinite() || !dz.allFinite()) {
            break;
        }
        x += step * dx;
        y += step * dy;
        s += step * ds;
        z += step * dz;
        sol.iterations = it + 1;
    }
    sol.x = x;
    sol.objective = 0.5 * x.dot(qp.hessian * x) + qp.linear.dot(x);
    return sol;
}

} // namespace

Solution solve_interior_point(const QuadraticProgram &qp, const InteriorPointOptions &opts) {
    const Index n = qp.linear.size();
    const Index p = qp.a_eq.rows();
    const Index m = qp.g.rows();
    if (qp.hessian.rows() != n || qp.hessian.cols() != n || qp.b_eq.size() != p ||
        qp.h.size() != m || (p > 0 && qp.a_eq.cols() != n) || (m > 0 && qp.g.cols() != n)) {
        throw std::invalid_argument("solve_interior_point: inconsistent dimensions");
    }
    const auto work = presolve(qp);
    if (!work) {
        Solution sol;
        sol.x = VectorXd::Zero(n);
        return sol;
    }
    auto sol = solve_presolved(*work, opts);
    sol.objective = 0.5 * sol.x.dot(qp.hessian * sol.x) + qp.linear.dot(sol.x);
    return sol;
}

} // namespace evc::qp
