#include "peak_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace oracle {

std::vector<double> block_energy(const evc::ChargeTask &task, int start, bool partial_first) {
    std::vector<double> out(24, 0.0);
    const int dur = static_cast<int>(std::ceil(task.energy_kwh / task.power_kw - 1e-9));
    const double partial = task.energy_kwh - (dur - 1) * task.power_kw;
    for (int k = 0; k < dur; ++k) {
        const int hour = task.window_start + start + k;
        const bool is_partial = partial_first ? k == 0 : k == dur - 1;
        out[static_cast<std::size_t>(((hour % 24) + 24) % 24)] +=
            is_partial ? partial : task.power_kw;
    }
    return out;
}

double minimal_peak(const std::vector<evc::ChargeTask> &tasks) {
    std::vector<std::vector<std::vector<double>>> options(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto &t = tasks[i];
        int len = ((t.window_end - t.window_start) % 24 + 24) % 24;
        if (len == 0) {
            len = 24;
        }
        const int dur = static_cast<int>(std::ceil(t.energy_kwh / t.power_kw - 1e-9));
        for (int s = 0; s + dur <= len; ++s) {
            options[i].push_back(block_energy(t, s, false));
            if (dur > 1) {
                options[i].push_back(block_energy(t, s, true));
            }
        }
    }
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> load(24, 0.0);
    std::function<void(std::size_t, double)> dfs = [&](std::size_t i, double peak) {
        if (peak >= best - 1e-12) {
            return;
        }
        if (i == tasks.size()) {
            best = peak;
            return;
        }
        for (const auto &opt : options[i]) {
            double p = peak;
            for (std::size_t h = 0; h < 24; ++h) {
                load[h] += opt[h];
                p = std::max(p, load[h]);
            }
            dfs(i + 1, p);
            for (std::size_t h = 0; h < 24; ++h) {
                load[h] -= opt[h];
            }
        }
    };
    dfs(0, 0.0);
    return best;
}

} // namespace oracle
