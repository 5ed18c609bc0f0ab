#pragma once

#include <string_view>

#include "evc/modes.hpp"
#include "evc/population.hpp"

namespace evc {

enum class ChargeLocation { None, Home, Work };

std::string_view to_string(ChargeLocation c) noexcept;

/// Behavioural knobs of the charging model (config defaults, not measured values).
struct ChargingOptions {
    double home_probability_single_family = 0.8;
    double home_probability_apartment = 0.3;
    int travel_hours = 1;
    double taxi_deadhead = 1.0;
};

/// Modes that recharge a personal battery and therefore need a charge location.
constexpr bool needs_charge_location(Mode m) noexcept {
    return m == Mode::PrivateEV || m == Mode::EBike || m == Mode::Scooter ||
           m == Mode::Motorcycle;
}

/// Home with the dwelling-specific probability, Work otherwise; None for
/// modes that do not need a location. `u` is uniform in [0,1).
ChargeLocation choose_charge_location(const Individual &ind, Mode mode,
                                      const ChargingOptions &opts, double u) noexcept;

/// Whole hours at work per day (weekly hours / 5, rounded, in [1, 22]).
int daily_work_hours(const Individual &ind) noexcept;

} // namespace evc
