#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "evc/modes.hpp"
#include "evc/population.hpp"

namespace evc {

/// Demographic and contextual constraints for one mode. An unset field is
/// unconstrained; all set fields must pass (conjunction). Bounds are inclusive.
struct EligibilityRule {
    Mode mode = Mode::Subway;
    std::optional<int> min_age;
    std::optional<int> max_age;
    std::optional<double> max_distance_km;
    std::optional<std::set<RegionTag>> allowed_home_regions;
    bool requires_bike_accessible = false;
    bool excludes_disability = false;
};

/// Invariant violations of a rule, e.g. "EBike: min_age 40 > max_age 30".
std::vector<std::string> check_rule(const EligibilityRule &rule);

class RuleSet {
  public:
    RuleSet() = default;

    /// Throws ConfigError if the rule violates its invariants.
    void set(EligibilityRule rule);
    /// Throws ConfigError when no rule exists for the mode.
    const EligibilityRule &rule_for(Mode mode) const;
    bool has(Mode mode) const noexcept { return rules_.contains(mode); }
    const std::map<Mode, EligibilityRule> &rules() const noexcept { return rules_; }

    /// Mode granted to anyone otherwise eligible for nothing.
    Mode fallback() const noexcept { return fallback_; }
    void set_fallback(Mode m) noexcept { fallback_ = m; }

  private:
    std::map<Mode, EligibilityRule> rules_;
    Mode fallback_ = Mode::Subway;
};

/// E-bike rule (age <= 70, distance <= 24 km, bike-accessible home in the
/// Bronx, Queens, Brooklyn, Northern NJ or Manhattan) and unconstrained rules
/// for every other mode.
RuleSet default_rules();

/// JSON: array of rule objects {"mode": "EBike", "max_age": 70, ...};
/// omitted fields are unconstrained. Modes missing from the array get an
/// unconstrained rule. Optional top-level object form
/// {"fallback": "Subway", "rules": [...]}.
RuleSet parse_rules(const nlohmann::json &doc);
RuleSet load_rules(const std::filesystem::path &path);
/// Diagnostics only; never throws for invariant violations.
std::vector<std::string> diagnose_rules(const nlohmann::json &doc);

bool is_eligible(const Individual &ind, Mode mode, const RuleSet &rules, const ZoneTable &zones,
                 double distance_km);

/// P(work from home | education, income bucket), optionally scaled per
/// industry (factor 1 when absent).
class WfhTable {
  public:
    using Matrix = std::array<std::array<double, kIncomeBuckets>, 2>;

    WfhTable() = default;
    /// Throws ValidationError unless every entry lies in [0,1].
    explicit WfhTable(const Matrix &p);

    static WfhTable constant(double p);
    /// Ratio wfh/total per cell; cells with total 0 use the income bucket's
    /// rate pooled across education levels (then the overall rate, then 0).
    static WfhTable from_counts(const std::array<std::array<double, kIncomeBuckets>, 2> &wfh,
                                const std::array<std::array<double, kIncomeBuckets>, 2> &total);

    double at(Education e, int income_bucket) const;
    const Matrix &matrix() const noexcept { return p_; }

    void set_industry_factor(Industry i, double factor);
    double industry_factor(Industry i) const noexcept;

  private:
    Matrix p_{};
    std::array<double, 3> industry_factor_{1.0, 1.0, 1.0};
};

/// JSON: {"probabilities": [[7 values NotCollege], [7 values College]]} or
/// {"counts": {"wfh": [[..],[..]], "total": [[..],[..]]}}, plus optional
/// {"industry_factor": {"BlueCollar": 0.3}}.
WfhTable parse_wfh_table(const nlohmann::json &doc);
WfhTable load_wfh_table(const std::filesystem::path &path);

/// Table entry for the individual's (education, income bucket), times the
/// industry factor, clamped to [0,1].
double wfh_probability(const Individual &ind, const WfhTable &table);

/// Every mode whose rule passes. WFH is dropped when `wfh` is given and the
/// individual's WFH probability is 0. The fallback mode is added whenever
/// no travel mode qualifies, so the set always holds a way to commute.
ModeSet eligible_set(const Individual &ind, const RuleSet &rules, const ZoneTable &zones,
                     const WfhTable *wfh = nullptr);

} // namespace evc
