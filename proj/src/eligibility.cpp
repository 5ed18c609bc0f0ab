#include "evc/eligibility.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "evc/error.hpp"

namespace evc {

namespace {

EligibilityRule unconstrained(Mode m) {
    EligibilityRule r;
    r.mode = m;
    return r;
}

} // namespace

std::vector<std::string> check_rule(const EligibilityRule &rule) {
    std::vector<std::string> v;
    const auto name = std::string(to_string(rule.mode));
    if (rule.min_age && rule.max_age && *rule.min_age > *rule.max_age) {
        v.push_back(name + ": min_age " + std::to_string(*rule.min_age) + " > max_age " +
                    std::to_string(*rule.max_age));
    }
    if (rule.max_distance_km && !(*rule.max_distance_km > 0.0)) {
        v.push_back(name + ": max_distance_km must be > 0");
    }
    return v;
}

void RuleSet::set(EligibilityRule rule) {
    if (auto v = check_rule(rule); !v.empty()) {
        throw ConfigError("invalid eligibility rule: " + v.front());
    }
    rules_[rule.mode] = std::move(rule);
}

const EligibilityRule &RuleSet::rule_for(Mode mode) const {
    auto it = rules_.find(mode);
    if (it == rules_.end()) {
        throw ConfigError("no eligibility rule for mode " + std::string(to_string(mode)));
    }
    return it->second;
}

RuleSet default_rules() {
    RuleSet rs;
    for (auto m : kAllModes) {
        rs.set(unconstrained(m));
    }
    auto ebike = unconstrained(Mode::EBike);
    ebike.max_age = 70;
    ebike.max_distance_km = 24.0;
    ebike.allowed_home_regions = std::set<RegionTag>{RegionTag::Bronx, RegionTag::Queens,
                                                     RegionTag::Brooklyn, RegionTag::NorthNJ,
                                                     RegionTag::Manhattan};
    ebike.requires_bike_accessible = true;
    rs.set(ebike);
    return rs;
}

namespace {

EligibilityRule parse_rule(const nlohmann::json &obj, std::vector<std::string> &errors) {
    EligibilityRule r;
    const auto mode_name = obj.value("mode", std::string{});
    auto mode = parse_mode(mode_name);
    if (!mode) {
        errors.push_back("rule: unknown mode '" + mode_name + "'");
        return r;
    }
    r.mode = *mode;
    const auto prefix = mode_name + ": ";
    for (const auto &[key, value] : obj.items()) {
        if (key == "mode") {
            continue;
        }
        if (key == "min_age") {
            r.min_age = value.get<int>();
        } else if (key == "max_age") {
            r.max_age = value.get<int>();
        } else if (key == "max_distance_km") {
            r.max_distance_km = value.get<double>();
        } else if (key == "allowed_home_regions") {
            std::set<RegionTag> regions;
            for (const auto &s : value) {
                auto tag = parse_region(s.get<std::string>());
                if (!tag) {
                    errors.push_back(prefix + "unknown region '" + s.get<std::string>() + "'");
                } else {
                    regions.insert(*tag);
                }
            }
            r.allowed_home_regions = std::move(regions);
        } else if (key == "requires_bike_accessible") {
            r.requires_bike_accessible = value.get<bool>();
        } else if (key == "excludes_disability") {
            r.excludes_disability = value.get<bool>();
        } else {
            errors.push_back(prefix + "unknown field '" + key + "'");
        }
    }
    return r;
}

struct ParsedRules {
    RuleSet rules;
    std::vector<std::string> errors;
};

ParsedRules parse_rules_collect(const nlohmann::json &doc) {
    ParsedRules out;
    const nlohmann::json *array = &doc;
    try {
        if (doc.is_object()) {
            if (doc.contains("fallback")) {
                auto fb = parse_mode(doc.at("fallback").get<std::string>());
                if (!fb || *fb == Mode::WFH) {
                    out.errors.push_back("fallback: must name a travel mode");
                } else {
                    out.rules.set_fallback(*fb);
                }
            }
            array = &doc.at("rules");
        }
        if (!array->is_array()) {
            out.errors.push_back("rules: expected an array of rule objects");
            return out;
        }
        std::map<Mode, EligibilityRule> parsed;
        for (const auto &obj : *array) {
            auto rule = parse_rule(obj, out.errors);
            auto v = check_rule(rule);
            out.errors.insert(out.errors.end(), v.begin(), v.end());
            if (parsed.contains(rule.mode)) {
                out.errors.push_back(std::string(to_string(rule.mode)) + ": duplicate rule");
            }
            parsed[rule.mode] = rule;
        }
        if (!out.errors.empty()) {
            return out;
        }
        for (auto m : kAllModes) {
            auto it = parsed.find(m);
            out.rules.set(it != parsed.end() ? it->second : unconstrained(m));
        }
    } catch (const nlohmann::json::exception &e) {
        out.errors.push_back(std::string("rules: ") + e.what());
    }
    return out;
}

nlohmann::json read_json(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open file: " + path.string());
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error &e) {
        throw ValidationError({path.string() + ": " + e.what()});
    }
}

} // namespace

RuleSet parse_rules(const nlohmann::json &doc) {
    auto parsed = parse_rules_collect(doc);
    if (!parsed.errors.empty()) {
        throw ValidationError(std::move(parsed.errors));
    }
    return std::move(parsed.rules);
}

std::vector<std::string> diagnose_rules(const nlohmann::json &doc) {
    return parse_rules_collect(doc).errors;
}

RuleSet load_rules(const std::filesystem::path &path) { return parse_rules(read_json(path)); }

bool is_eligible(const Individual &ind, Mode mode, const RuleSet &rules, const ZoneTable &zones,
                 double distance_km) {
    const auto &r = rules.rule_for(mode);
    if (r.min_age && ind.age < *r.min_age) {
        return false;
    }
    if (r.max_age && ind.age > *r.max_age) {
        return false;
    }
    if (r.max_distance_km && distance_km > *r.max_distance_km) {
        return false;
    }
    if (r.excludes_disability && ind.has_disability) {
        return false;
    }
    if (r.allowed_home_regions || r.requires_bike_accessible) {
        const auto &home = zones.at(ind.home_zone);
        if (r.allowed_home_regions && !r.allowed_home_regions->contains(home.region)) {
            return false;
        }
        if (r.requires_bike_accessible && !home.bike_accessible) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// WFH table
// ---------------------------------------------------------------------------

WfhTable::WfhTable(const Matrix &p) : p_(p) {
    std::vector<std::string> errors;
    for (std::size_t e = 0; e < 2; ++e) {
        for (std::size_t b = 0; b < kIncomeBuckets; ++b) {
            const double v = p[e][b];
            if (!(v >= 0.0 && v <= 1.0)) {
                errors.push_back("wfh table entry [" + std::to_string(e) + "][" +
                                 std::to_string(b) + "] must lie in [0,1]");
            }
        }
    }
    if (!errors.empty()) {
        throw ValidationError(std::move(errors));
    }
}

WfhTable WfhTable::constant(double p) {
    Matrix m;
    for (auto &row : m) {
        row.fill(p);
    }
    return WfhTable(m);
}

WfhTable WfhTable::from_counts(const std::array<std::array<double, kIncomeBuckets>, 2> &wfh,
                               const std::array<std::array<double, kIncomeBuckets>, 2> &total) {
    std::vector<std::string> errors;
    double all_wfh = 0.0;
    double all_total = 0.0;
    for (std::size_t e = 0; e < 2; ++e) {
        for (std::size_t b = 0; b < kIncomeBuckets; ++b) {
            if (!(wfh[e][b] >= 0.0) || !(total[e][b] >= wfh[e][b])) {
                errors.push_back("wfh counts [" + std::to_string(e) + "][" + std::to_string(b) +
                                 "]: need 0 <= wfh <= total");
            }
            all_wfh += wfh[e][b];
            all_total += total[e][b];
        }
    }
    if (!errors.empty()) {
        throw ValidationError(std::move(errors));
    }
    const double overall = all_total > 0.0 ? all_wfh / all_total : 0.0;
    Matrix m{};
    for (std::size_t b = 0; b < kIncomeBuckets; ++b) {
        const double col_total = total[0][b] + total[1][b];
        const double col_rate = col_total > 0.0 ? (wfh[0][b] + wfh[1][b]) / col_total : overall;
        for (std::size_t e = 0; e < 2; ++e) {
            m[e][b] = total[e][b] > 0.0 ? wfh[e][b] / total[e][b] : col_rate;
        }
    }
    return WfhTable(m);
}

double WfhTable::at(Education e, int income_bucket) const {
    if (income_bucket < 0 || income_bucket >= kIncomeBuckets) {
        throw std::out_of_range("income bucket out of range");
    }
    return p_[static_cast<std::size_t>(e)][static_cast<std::size_t>(income_bucket)];
}

void WfhTable::set_industry_factor(Industry i, double factor) {
    if (!(factor >= 0.0) || !std::isfinite(factor)) {
        throw ValidationError({"industry_factor must be finite and >= 0"});
    }
    industry_factor_[static_cast<std::size_t>(i)] = factor;
}

double WfhTable::industry_factor(Industry i) const noexcept {
    return industry_factor_[static_cast<std::size_t>(i)];
}

WfhTable parse_wfh_table(const nlohmann::json &doc) {
    using Row = std::array<double, kIncomeBuckets>;
    const auto read_matrix = [](const nlohmann::json &j, const char *what) {
        std::array<Row, 2> m{};
        if (!j.is_array() || j.size() != 2) {
            throw ValidationError({std::string(what) + ": expected 2 rows (NotCollege, College)"});
        }
        for (std::size_t e = 0; e < 2; ++e) {
            if (!j[e].is_array() || j[e].size() != kIncomeBuckets) {
                throw ValidationError({std::string(what) + ": each row needs 7 income buckets"});
            }
            for (std::size_t b = 0; b < kIncomeBuckets; ++b) {
                m[e][b] = j[e][b].get<double>();
            }
        }
        return m;
    };
    try {
        WfhTable table;
        if (doc.contains("probabilities")) {
            table = WfhTable(read_matrix(doc.at("probabilities"), "probabilities"));
        } else if (doc.contains("counts")) {
            const auto &c = doc.at("counts");
            table = WfhTable::from_counts(read_matrix(c.at("wfh"), "counts.wfh"),
                                          read_matrix(c.at("total"), "counts.total"));
        } else {
            throw ValidationError({"wfh table: needs 'probabilities' or 'counts'"});
        }
        if (doc.contains("industry_factor")) {
            for (const auto &[k, v] : doc.at("industry_factor").items()) {
                auto ind = parse_industry(k);
                if (!ind) {
                    throw ValidationError({"industry_factor: unknown industry '" + k + "'"});
                }
                table.set_industry_factor(*ind, v.get<double>());
            }
        }
        return table;
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError({std::string("wfh table: ") + e.what()});
    }
}

WfhTable load_wfh_table(const std::filesystem::path &path) {
    return parse_wfh_table(read_json(path));
}

double wfh_probability(const Individual &ind, const WfhTable &table) {
    const double p = table.at(ind.education, ind.income_bucket) * table.industry_factor(ind.industry);
    return std::clamp(p, 0.0, 1.0);
}

ModeSet eligible_set(const Individual &ind, const RuleSet &rules, const ZoneTable &zones,
                     const WfhTable *wfh) {
    const double distance = commute_distance(ind, zones);
    ModeSet set;
    for (auto m : kAllModes) {
        if (is_eligible(ind, m, rules, zones, distance)) {
            set.insert(m);
        }
    }
    if (wfh != nullptr && set.contains(Mode::WFH) && wfh_probability(ind, *wfh) <= 0.0) {
        set.erase(Mode::WFH);
    }
    ModeSet travel = set;
    travel.erase(Mode::WFH);
    if (travel.empty()) {
        set.insert(rules.fallback());
    }
    return set;
}

} // namespace evc
