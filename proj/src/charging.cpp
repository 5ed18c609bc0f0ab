#include "evc/charging.hpp"

#include <algorithm>
#include <cmath>

namespace evc {

std::string_view to_string(ChargeLocation c) noexcept {
    switch (c) {
    case ChargeLocation::Home:
        return "Home";
    case ChargeLocation::Work:
        return "Work";
    case ChargeLocation::None:
        break;
    }
    return "None";
}

ChargeLocation choose_charge_location(const Individual &ind, Mode mode,
                                      const ChargingOptions &opts, double u) noexcept {
    if (!needs_charge_location(mode)) {
        return ChargeLocation::None;
    }
    const double p_home = ind.dwelling == Dwelling::SingleFamilyOwned
                              ? opts.home_probability_single_family
                              : opts.home_probability_apartment;
    return u < p_home ? ChargeLocation::Home : ChargeLocation::Work;
}

int daily_work_hours(const Individual &ind) noexcept {
    const auto h = static_cast<int>(std::lround(ind.hours_per_week / 5.0));
    return std::clamp(h, 1, 22);
}

} // namespace evc
