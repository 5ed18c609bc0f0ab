#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "evc/charging.hpp"
#include "evc/exec.hpp"
#include "evc/modes.hpp"
#include "evc/population.hpp"
#include "evc/sampler.hpp"

namespace evc {

inline constexpr int kHours = 24;
using Hourly = std::array<double, kHours>;

enum class EnergyKind { BatteryCharged, AtMotion, NoEnergy };

std::string_view to_string(EnergyKind k) noexcept;
std::optional<EnergyKind> parse_energy_kind(std::string_view s) noexcept;

struct ModeSpec {
    Mode mode = Mode::Walk;
    double range_km = 0.0;
    double efficiency_kwh_per_km = 0.0;
    double charge_power_kw = 0.0;
    EnergyKind kind = EnergyKind::NoEnergy;
    bool assumption = false; ///< bundled placeholder value, not a measured spec
};

std::vector<std::string> check_spec(const ModeSpec &spec);

class ModeSpecTable {
  public:
    /// Requires one row per mode; Walk must be NoEnergy, Subway and Rail AtMotion.
    explicit ModeSpecTable(std::vector<ModeSpec> specs);
    ModeSpecTable() = default;

    const ModeSpec &at(Mode m) const;
    const std::map<Mode, ModeSpec> &specs() const noexcept { return specs_; }

  private:
    std::map<Mode, ModeSpec> specs_;
};

/// CSV `mode,range_km,efficiency_kwh_per_km,charge_power_kw,kind[,assumption]`.
ModeSpecTable load_mode_specs(const std::filesystem::path &path);

/// Traction load of rail transit: a fixed hourly floor plus energy per rider-day.
struct TransitSpec {
    Hourly fixed_kw{};
    double per_rider_kwh = 0.0;
    bool assumption = false;
};

/// {"fixed_kw": [24 values], "per_rider_kwh": x, "assumption": true}
TransitSpec parse_transit_spec(const nlohmann::json &doc);
TransitSpec load_transit_spec(const std::filesystem::path &path);

struct TripEnergy {
    double kwh = 0.0;          ///< energy charged (clamped to battery capacity)
    double requested_kwh = 0.0;
    bool infeasible = false; ///< trip longer than the battery covers
};

/// distance * (2 if round trip) * efficiency. A trip beyond range_km (round
/// trips must fit twice the distance) is flagged and clamped to a full battery.
TripEnergy trip_energy(const ModeSpec &spec, double distance_km, bool round_trip);

/// Charging job of one vehicle within [window_start, window_end) (wrapping past
/// midnight).
struct ChargeTask {
    std::int64_t individual_id = 0;
    Mode mode = Mode::PrivateEV;
    double energy_kwh = 0.0;
    double power_kw = 1.0;
    int window_start = 0;
    int window_end = 0;
    ChargeLocation location = ChargeLocation::Work;

    /// Whole hours in the window; an empty interval (start == end) means 24.
    int window_length() const noexcept;
    /// Hour slots needed at full power.
    int duration() const noexcept;
};

/// Demand that could not be delivered as requested.
struct TaskIssue {
    enum class Kind { RangeExceeded, WindowTooShort };
    std::int64_t individual_id = 0;
    Mode mode = Mode::PrivateEV;
    Kind kind = Kind::RangeExceeded;
    double residual_kwh = 0.0;
};

struct ChargeTaskSet {
    std::vector<ChargeTask> tasks;
    std::vector<TaskIssue> issues;
};

struct EnergyInputs {
    const Population &population;
    const ZoneTable &zones;
    const ModeSpecTable &specs;
    const ChargingOptions &charging;
};

/// One task per battery-charged trip. Personal vehicles charge once a day
/// for the round trip at the scenario's charge location; buses charge at the
/// depot only for riders living in Manhattan; taxis recharge during the
/// rider's working hours. Tasks whose energy exceeds power * window are
/// truncated and the residual reported.
ChargeTaskSet build_charge_tasks(const Scenario &scn, const EnergyInputs &in,
                                 Exec exec = Exec::Parallel);

enum class ChargingPolicy { Earliest, Latest, Distributed };

inline constexpr std::array<ChargingPolicy, 3> kAllPolicies{
    ChargingPolicy::Earliest, ChargingPolicy::Latest, ChargingPolicy::Distributed};

std::string_view to_string(ChargingPolicy p) noexcept;
std::optional<ChargingPolicy> parse_policy(std::string_view s) noexcept;

/// Where a task sits in its window: `offset` hours after window_start. The
/// block is charged at full power; the partial hour comes last unless
/// `partial_first` (used by Latest so charging ends exactly at window_end).
struct Placement {
    int offset = 0;
    bool partial_first = false;

    bool operator==(const Placement &) const = default;
};

/// Energy delivered in each hour of the day by one placed task, kWh.
Hourly placed_energy(const ChargeTask &task, Placement where);

/// Start times per task. Earliest and Latest are closed-form; Distributed is
/// a greedy lowest-peak insertion (descending energy, earliest offset on
/// ties) refined by reinsertion passes, and never returns a schedule whose
/// peak exceeds the Earliest or Latest peak. Distributed is sequential.
std::vector<Placement> place_tasks(std::span<const ChargeTask> tasks, ChargingPolicy policy);

/// Per-category hourly load in MW plus total.
struct LoadProfile {
    std::array<Hourly, kCategoryCount> category_mw{};
    Hourly total_mw{};

    const Hourly &operator[](Category c) const noexcept { return category_mw[index_of(c)]; }
    double peak_mw() const noexcept;
    /// Daily energy, MWh.
    double daily_mwh() const noexcept;
    void add(Category c, int hour, double mw) noexcept;
    /// Recomputes total_mw from the categories.
    void finalize() noexcept;
    void scale(double factor) noexcept;
    LoadProfile &operator+=(const LoadProfile &other) noexcept;
};

/// Charging load of the tasks under the policy. Earliest and Latest are
/// summed in fixed chunks so the result does not depend on thread count.
LoadProfile schedule(std::span<const ChargeTask> tasks, ChargingPolicy policy,
                     Exec exec = Exec::Parallel);

/// Rail-transit traction: fixed floor plus per_rider_kwh per AtMotion rider,
/// half in the hour before arrival, half in the departure hour.
LoadProfile transit_load(const Scenario &scn, const EnergyInputs &in, const TransitSpec &tspec);

struct DemandResult {
    LoadProfile profile;
    std::vector<TaskIssue> issues;
    std::size_t task_count = 0;
};

/// Charging load plus transit load. `population_weight` scales the
/// commuter-driven parts (each individual stands for that many commuters);
/// the transit fixed floor is not scaled.
DemandResult scenario_demand(const Scenario &scn, const EnergyInputs &in,
                             const TransitSpec &tspec, ChargingPolicy policy,
                             double population_weight = 1.0, Exec exec = Exec::Parallel);

/// CSV `hour,transit_mw,car_mw,micromobility_mw,total_mw`.
void write_profile_csv(const std::filesystem::path &path, const LoadProfile &profile);
nlohmann::json to_json(const LoadProfile &profile);

} // namespace evc
