#include "lp_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace oracle {

std::optional<Vec> gauss_solve(Mat a, Vec b, double eps) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) {
                piv = r;
            }
        }
        if (std::abs(a[piv][col]) < eps) {
            return std::nullopt;
        }
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t k = col; k < n; ++k) {
                a[r][k] -= f * a[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    Vec x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) {
            s -= a[i][k] * x[k];
        }
        x[i] = s / a[i][i];
    }
    return x;
}

std::optional<Mat> invert(Mat a, double eps) {
    const std::size_t n = a.size();
    Mat inv(n, Vec(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        inv[i][i] = 1.0;
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) {
                piv = r;
            }
        }
        if (std::abs(a[piv][col]) < eps) {
            return std::nullopt;
        }
        std::swap(a[piv], a[col]);
        std::swap(inv[piv], inv[col]);
        const double p = a[col][col];
        for (std::size_t k = 0; k < n; ++k) {
            a[col][k] /= p;
            inv[col][k] /= p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) {
                continue;
            }
            const double f = a[r][col];
            for (std::size_t k = 0; k < n; ++k) {
                a[r][k] -= f * a[col][k];
                inv[r][k] -= f * inv[col][k];
            }
        }
    }
    return inv;
}

Mat sensitivity(const evc::Network &net) {
    const std::size_t n = net.buses.size();
    // bus -> row in the slack-free system
    std::vector<long> pos(n, -1);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i != net.slack) {
            pos[i] = static_cast<long>(k++);
        }
    }
    Mat lap(k, Vec(k, 0.0));
    for (const auto &l : net.lines) {
        const long f = pos[l.from];
        const long t = pos[l.to];
        if (f >= 0) {
            lap[f][f] += l.susceptance;
        }
        if (t >= 0) {
            lap[t][t] += l.susceptance;
        }
        if (f >= 0 && t >= 0) {
            lap[f][t] -= l.susceptance;
            lap[t][f] -= l.susceptance;
        }
    }
    Mat x = k ? invert(lap).value() : Mat{};
    Mat out(net.lines.size(), Vec(n, 0.0));
    for (std::size_t li = 0; li < net.lines.size(); ++li) {
        const auto &l = net.lines[li];
        for (std::size_t b = 0; b < n; ++b) {
            if (pos[b] < 0) {
                continue;
            }
            const double tf = pos[l.from] >= 0 ? x[pos[l.from]][pos[b]] : 0.0;
            const double tt = pos[l.to] >= 0 ? x[pos[l.to]][pos[b]] : 0.0;
            out[li][b] = l.susceptance * (tf - tt);
        }
    }
    return out;
}

std::optional<double> enumerate_vertices(const SmallLp &lp, double tol) {
    const std::size_t n = lp.c.size();
    const std::size_t m_eq = lp.a_eq.size();
    const std::size_t m = lp.a_ub.size();
    if (m_eq > n) {
        return std::nullopt;
    }
    const std::size_t pick = n - m_eq;
    std::optional<double> best;
    std::vector<std::size_t> chosen;

    const auto feasible = [&](const Vec &x) {
        for (std::size_t r = 0; r < m; ++r) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                s += lp.a_ub[r][j] * x[j];
            }
            if (s > lp.b_ub[r] + tol * std::max(1.0, std::abs(lp.b_ub[r]))) {
                return false;
            }
        }
        for (std::size_t r = 0; r < m_eq; ++r) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                s += lp.a_eq[r][j] * x[j];
            }
            if (std::abs(s - lp.b_eq[r]) > tol * std::max(1.0, std::abs(lp.b_eq[r]))) {
                return false;
            }
        }
        return true;
    };

    std::function<void(std::size_t)> rec = [&](std::size_t start) {
        if (chosen.size() == pick) {
            Mat a = lp.a_eq;
            Vec b = lp.b_eq;
            for (auto r : chosen) {
                a.push_back(lp.a_ub[r]);
                b.push_back(lp.b_ub[r]);
            }
            auto x = gauss_solve(a, b);
            if (x && feasible(*x)) {
                double v = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    v += lp.c[j] * (*x)[j];
                }
                if (!best || v > *best) {
                    best = v;
                }
            }
            return;
        }
        for (std::size_t r = start; r + (pick - chosen.size()) <= m; ++r) {
            chosen.push_back(r);
            rec(r + 1);
            chosen.pop_back();
        }
    };
    rec(0);
    return best;
}

SmallLp capacity_program(const evc::Network &net, int hour) {
    const std::size_t nb = net.buses.size();
    const std::size_t ng = net.generators.size();
    std::vector<std::size_t> man;
    for (std::size_t i = 0; i < nb; ++i) {
        if (net.buses[i].designated) {
            man.push_back(i);
        }
    }
    const std::size_t n = ng + man.size();
    Vec d(nb);
    double total = 0.0;
    for (std::size_t i = 0; i < nb; ++i) {
        d[i] = net.buses[i].load_mw[static_cast<std::size_t>(hour)];
        total += d[i];
    }
    SmallLp lp;
    lp.c.assign(n, 0.0);
    for (std::size_t k = 0; k < man.size(); ++k) {
        lp.c[ng + k] = 1.0;
    }
    Vec balance(n, 0.0);
    for (std::size_t g = 0; g < ng; ++g) {
        balance[g] = 1.0;
    }
    for (std::size_t k = 0; k < man.size(); ++k) {
        balance[ng + k] = -1.0;
    }
    lp.a_eq.push_back(balance);
    lp.b_eq.push_back(total);

    const auto row = [&](std::size_t j, double coef, double rhs) {
        Vec r(n, 0.0);
        r[j] = coef;
        lp.a_ub.push_back(r);
        lp.b_ub.push_back(rhs);
    };
    for (std::size_t g = 0; g < ng; ++g) {
        row(g, -1.0, -net.generators[g].p_min_mw);
        if (std::isfinite(net.generators[g].p_max_mw)) {
            row(g, 1.0, net.generators[g].p_max_mw);
        }
    }
    for (std::size_t k = 0; k < man.size(); ++k) {
        row(ng + k, -1.0, 0.0);
    }
    const auto s = sensitivity(net);
    for (std::size_t li = 0; li < net.lines.size(); ++li) {
        // flow = sum_g s[bus_g] p_g - sum_i s[i] d_i - sum_k s[man_k] a_k
        Vec r(n, 0.0);
        for (std::size_t g = 0; g < ng; ++g) {
            r[g] = s[li][net.generators[g].bus];
        }
        for (std::size_t k = 0; k < man.size(); ++k) {
            r[ng + k] = -s[li][man[k]];
        }
        double sd = 0.0;
        for (std::size_t i = 0; i < nb; ++i) {
            sd += s[li][i] * d[i];
        }
        const double cap = net.lines[li].capacity_mw;
        Vec neg(n);
        std::transform(r.begin(), r.end(), neg.begin(), [](double v) { return -v; });
        lp.a_ub.push_back(r);
        lp.b_ub.push_back(cap + sd);
        lp.a_ub.push_back(neg);
        lp.b_ub.push_back(cap - sd);
    }
    return lp;
}

std::optional<double> max_additional(const evc::Network &net, int hour) {
    return enumerate_vertices(capacity_program(net, hour));
}

} // namespace oracle
