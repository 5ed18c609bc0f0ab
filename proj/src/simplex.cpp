#include "evc/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace evc::lp {

const char *to_string(Status s) noexcept {
    switch (s) {
    case Status::Optimal:
        return "optimal";
    case Status::Infeasible:
        return "infeasible";
    case Status::Unbounded:
        return "unbounded";
    case Status::IterationLimit:
        break;
    }
    return "iteration limit";
}

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr int kDegenerateRun = 50;

/// Tableau with the objective in the last row. Entries of the last row are
/// reduced costs z_j - c_j of a maximisation; the last column is the rhs.
class Tableau {
  public:
    Tableau(MatrixXd t, std::vector<Index> basis, double tol)
        : t_(std::move(t)), basis_(std::move(basis)), tol_(tol) {}

    Index rows() const noexcept { return t_.rows() - 1; }
    Index cols() const noexcept { return t_.cols() - 1; }
    double rhs(Index r) const { return t_(r, cols()); }
    double value() const { return t_(rows(), cols()); }
    Index basis(Index r) const { return basis_[static_cast<std::size_t>(r)]; }
    double at(Index r, Index c) const { return t_(r, c); }

    void set_objective(const VectorXd &cost) {
        t_.row(rows()).setZero();
        t_.row(rows()).head(cost.size()) = -cost.transpose();
        for (Index r = 0; r < rows(); ++r) {
            const auto b = basis(r);
            if (b < cost.size() && cost(b) != 0.0) {
                t_.row(rows()) += cost(b) * t_.row(r);
            }
        }
    }

    void pivot(Index r, Index c) {
        t_.row(r) /= t_(r, c);
        for (Index i = 0; i <= rows(); ++i) {
            if (i != r) {
                const double f = t_(i, c);
                if (f != 0.0) {
                    t_.row(i) -= f * t_.row(r);
                    t_(i, c) = 0.0;
                }
            }
        }
        basis_[static_cast<std::size_t>(r)] = c;
    }

    /// Runs pivots until optimal. Columns at or beyond `allowed` never enter.
    Status optimise(Index allowed, int &iterations, int max_iterations) {
        bool bland = false;
        int degenerate = 0;
        while (true) {
            if (iterations >= max_iterations) {
                return Status::IterationLimit;
            }
            Index enter = -1;
            double best = -tol_;
            for (Index j = 0; j < allowed; ++j) {
                const double d = t_(rows(), j);
                if (d < best) {
                    enter = j;
                    if (bland) {
                        break;
                    }
                    best = d;
                }
            }
            if (enter < 0) {
                return Status::Optimal;
            }
            Index leave = -1;
            double ratio = std::numeric_limits<double>::infinity();
            for (Index i = 0; i < rows(); ++i) {
                const double a = t_(i, enter);
                if (a > tol_) {
                    const double q = rhs(i) / a;
                    if (q < ratio - tol_ ||
                        (q <= ratio + tol_ && leave >= 0 && basis(i) < basis(leave))) {
                        ratio = std::min(ratio, q);
                        leave = i;
                    }
                }
            }
            if (leave < 0) {
                return Status::Unbounded;
            }
            if (ratio <= tol_) {
                if (++degenerate >= kDegenerateRun) {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            pivot(leave, enter);
            ++iterations;
        }
    }

  private:
    MatrixXd t_;
    std::vector<Index> basis_;
    double tol_;
};

} // namespace

Solution solve_simplex(const LinearProgram &lp, const SimplexOptions &opts) {
    const Index n = lp.variables();
    const auto check = [&](bool ok, const char *what) {
        if (!ok) {
            throw std::invalid_argument(std::string("solve_simplex: ") + what);
        }
    };
    check(lp.lower.size() == n && lp.upper.size() == n, "bound sizes");
    check(lp.a_ub.rows() == lp.b_ub.size() && (lp.a_ub.rows() == 0 || lp.a_ub.cols() == n),
          "inequality shape");
    check(lp.a_eq.rows() == lp.b_eq.size() && (lp.a_eq.rows() == 0 || lp.a_eq.cols() == n),
          "equality shape");
    for (Index j = 0; j < n; ++j) {
        check(std::isfinite(lp.lower(j)), "lower bounds must be finite");
        check(lp.upper(j) >= lp.lower(j), "upper bound below lower bound");
    }

    // Shift to y = x - lower >= 0; finite upper bounds become rows.
    std::vector<Index> upper_rows;
    for (Index j = 0; j < n; ++j) {
        if (std::isfinite(lp.upper(j))) {
            upper_rows.push_back(j);
        }
    }
    const Index m_ub = lp.a_ub.rows() + static_cast<Index>(upper_rows.size());
    const Index m_eq = lp.a_eq.rows();
    const Index m = m_ub + m_eq;

    MatrixXd a(m, n);
    VectorXd b(m);
    if (lp.a_ub.rows() > 0) {
        a.topRows(lp.a_ub.rows()) = lp.a_ub;
        b.head(lp.a_ub.rows()) = lp.b_ub - lp.a_ub * lp.lower;
    }
    for (std::size_t k = 0; k < upper_rows.size(); ++k) {
        const Index r = lp.a_ub.rows() + static_cast<Index>(k);
        const Index j = upper_rows[k];
        a.row(r).setZero();
        a(r, j) = 1.0;
        b(r) = lp.upper(j) - lp.lower(j);
    }
    if (m_eq > 0) {
        a.bottomRows(m_eq) = lp.a_eq;
        b.tail(m_eq) = lp.b_eq - lp.a_eq * lp.lower;
    }

    // Columns: structural | slacks (one per inequality) | artificials.
    std::vector<Index> needs_artificial;
    for (Index r = 0; r < m; ++r) {
        if (r >= m_ub || b(r) < 0.0) {
            needs_artificial.push_back(r);
        }
    }
    const Index n_art = static_cast<Index>(needs_artificial.size());
    const Index cols = n + m_ub + n_art;
    MatrixXd t = MatrixXd::Zero(m + 1, cols + 1);
    std::vector<Index> basis(static_cast<std::size_t>(m));
    for (Index r = 0; r < m; ++r) {
        const double sign = b(r) < 0.0 ? -1.0 : 1.0;
        t.row(r).head(n) = sign * a.row(r);
        if (r < m_ub) {
            t(r, n + r) = sign;
            basis[static_cast<std::size_t>(r)] = n + r;
        }
        t(r, cols) = sign * b(r);
    }
    for (Index k = 0; k < n_art; ++k) {
        const Index r = needs_artificial[static_cast<std::size_t>(k)];
        t(r, n + m_ub + k) = 1.0;
        basis[static_cast<std::size_t>(r)] = n + m_ub + k;
    }

    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff() * (m > 0 ? 1.0 : 0.0));
    Tableau tab(std::move(t), std::move(basis), opts.tolerance);
    Solution sol;

    if (n_art > 0) {
        VectorXd phase1 = VectorXd::Zero(cols);
        phase1.tail(n_art).setConstant(-1.0);
        tab.set_objective(phase1);
        const auto st = tab.optimise(cols, sol.iterations, opts.max_iterations);
        if (st == Status::IterationLimit) {
            sol.status = st;
            return sol;
        }
        if (tab.value() < -opts.tolerance * scale * 10.0) {
            sol.status = Status::Infeasible;
            return sol;
        }
        // Drive remaining artificials out of the basis where possible.
        for (Index r = 0; r < tab.rows(); ++r) {
            if (tab.basis(r) < n + m_ub) {
                continue;
            }
            for (Index j = 0; j < n + m_ub; ++j) {
                if (std::abs(tab.at(r, j)) > opts.tolerance) {
                    tab.pivot(r, j);
                    break;
                }
            }
        }
    }

    VectorXd phase2 = VectorXd::Zero(n + m_ub);
    phase2.head(n) = lp.objective;
    tab.set_objective(phase2);
    sol.status = tab.optimise(n + m_ub, sol.iterations, opts.max_iterations);
    if (sol.status != Status::Optimal) {
        return sol;
    }
    VectorXd y = VectorXd::Zero(n);
    for (Index r = 0; r < tab.rows(); ++r) {
        if (tab.basis(r) < n) {
            y(tab.basis(r)) = std::max(0.0, tab.rhs(r));
        }
    }
    sol.x = y + lp.lower;
    sol.objective = lp.objective.dot(sol.x);
    return sol;
}

} // namespace evc::lp
