#include "evc/population.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <omp.h>

#include "evc/csv.hpp"
#include "evc/error.hpp"
#include "evc/rng.hpp"

namespace evc {

namespace {

template <class E, std::size_t N>
std::optional<E> lookup(std::string_view s, const std::array<std::string_view, N> &names) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == s) {
            return static_cast<E>(i);
        }
    }
    return std::nullopt;
}

constexpr std::array<std::string_view, 7> kRegionNames{
    "Manhattan", "Bronx", "Queens", "Brooklyn", "StatenIsland", "NorthNJ", "Other"};
constexpr std::array<std::string_view, 3> kGenderNames{"Female", "Male", "Other"};
constexpr std::array<std::string_view, 2> kEducationNames{"NotCollege", "College"};
constexpr std::array<std::string_view, 3> kIndustryNames{"WhiteCollar", "Service", "BlueCollar"};
constexpr std::array<std::string_view, 2> kDwellingNames{"SingleFamilyOwned", "Apartment"};

std::optional<long long> to_int(std::string_view s) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

std::optional<double> to_real(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

std::optional<bool> to_bool01(std::string_view s) {
    if (s == "0") {
        return false;
    }
    if (s == "1") {
        return true;
    }
    return std::nullopt;
}

template <class E, std::size_t N> std::string choices(const std::array<std::string_view, N> &n) {
    std::string out;
    for (auto s : n) {
        out += out.empty() ? "" : "|";
        out += s;
    }
    return out;
}

} // namespace

std::string_view to_string(RegionTag v) noexcept { return kRegionNames[static_cast<int>(v)]; }
std::string_view to_string(Gender v) noexcept { return kGenderNames[static_cast<int>(v)]; }
std::string_view to_string(Education v) noexcept { return kEducationNames[static_cast<int>(v)]; }
std::string_view to_string(Industry v) noexcept { return kIndustryNames[static_cast<int>(v)]; }
std::string_view to_string(Dwelling v) noexcept { return kDwellingNames[static_cast<int>(v)]; }

std::optional<RegionTag> parse_region(std::string_view s) noexcept {
    return lookup<RegionTag>(s, kRegionNames);
}
std::optional<Gender> parse_gender(std::string_view s) noexcept {
    return lookup<Gender>(s, kGenderNames);
}
std::optional<Education> parse_education(std::string_view s) noexcept {
    return lookup<Education>(s, kEducationNames);
}
std::optional<Industry> parse_industry(std::string_view s) noexcept {
    return lookup<Industry>(s, kIndustryNames);
}
std::optional<Dwelling> parse_dwelling(std::string_view s) noexcept {
    return lookup<Dwelling>(s, kDwellingNames);
}

// ---------------------------------------------------------------------------
// Zones
// ---------------------------------------------------------------------------

ZoneTable::ZoneTable(std::vector<Zone> zones) : zones_(std::move(zones)) {
    std::vector<std::string> errors;
    for (std::size_t i = 0; i < zones_.size(); ++i) {
        const auto &z = zones_[i];
        if (!std::isfinite(z.centroid_x_km) || !std::isfinite(z.centroid_y_km)) {
            errors.push_back("zone " + z.id + ": non-finite centroid");
        }
        if (!index_.emplace(z.id, i).second) {
            errors.push_back("zone " + z.id + ": duplicate id");
        }
    }
    if (!errors.empty()) {
        throw ValidationError(std::move(errors));
    }
}

const Zone *ZoneTable::find(std::string_view id) const noexcept {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &zones_[it->second];
}

const Zone &ZoneTable::at(std::string_view id) const {
    const auto *z = find(id);
    if (z == nullptr) {
        throw Error("unknown zone id: " + std::string(id));
    }
    return *z;
}

ZoneTable load_zones(const std::filesystem::path &path) {
    auto table = csv::read(path);
    const auto c_id = table.column("id");
    const auto c_x = table.column("centroid_x_km");
    const auto c_y = table.column("centroid_y_km");
    const auto c_region = table.column("region_tag");
    const auto c_bike = table.column("bike_accessible");

    std::vector<std::string> errors;
    std::vector<Zone> zones;
    for (const auto &row : table.rows) {
        auto where = "row " + std::to_string(row.index);
        if (row.fields.size() != table.header.size()) {
            errors.push_back(where + ": expected " + std::to_string(table.header.size()) +
                             " fields, got " + std::to_string(row.fields.size()));
            continue;
        }
        Zone z;
        z.id = row.fields[c_id];
        auto x = to_real(row.fields[c_x]);
        auto y = to_real(row.fields[c_y]);
        auto region = parse_region(row.fields[c_region]);
        auto bike = to_bool01(row.fields[c_bike]);
        if (z.id.empty()) {
            errors.push_back(where + ", field id: empty");
        }
        if (!x) {
            errors.push_back(where + ", field centroid_x_km: not a finite number");
        }
        if (!y) {
            errors.push_back(where + ", field centroid_y_km: not a finite number");
        }
        if (!region) {
            errors.push_back(where + ", field region_tag: expected one of " +
                             choices<RegionTag>(kRegionNames));
        }
        if (!bike) {
            errors.push_back(where + ", field bike_accessible: expected 0 or 1");
        }
        if (x && y && region && bike) {
            z.centroid_x_km = *x;
            z.centroid_y_km = *y;
            z.region = *region;
            z.bike_accessible = *bike;
            zones.push_back(std::move(z));
        }
    }
    if (!errors.empty()) {
        for (auto &e : errors) {
            e = path.string() + ": " + e;
        }
        throw ValidationError(std::move(errors));
    }
    return ZoneTable(std::move(zones));
}

// ---------------------------------------------------------------------------
// Individuals
// ---------------------------------------------------------------------------

std::vector<std::string> check_individual(const Individual &ind, const ZoneTable &zones) {
    std::vector<std::string> v;
    if (ind.age < 16) {
        v.push_back("age: must be >= 16");
    }
    if (ind.income_bucket < 0 || ind.income_bucket >= kIncomeBuckets) {
        v.push_back("income_bucket: must be in 0..6");
    }
    if (ind.arrival_hour < 0 || ind.arrival_hour > 23) {
        v.push_back("arrival_hour: must be in 0..23");
    }
    if (!(ind.hours_per_week >= 0.0) || !std::isfinite(ind.hours_per_week)) {
        v.push_back("hours_per_week: must be a finite value >= 0");
    }
    if (!zones.contains(ind.home_zone)) {
        v.push_back("home_zone: unknown zone id '" + ind.home_zone + "'");
    }
    if (!zones.contains(ind.work_zone)) {
        v.push_back("work_zone: unknown zone id '" + ind.work_zone + "'");
    }
    return v;
}

Population load_population(const std::filesystem::path &path, const ZoneTable &zones) {
    if (!std::filesystem::exists(path)) {
        throw Error("population file not found: " + path.string());
    }
    auto table = csv::read(path);
    static constexpr std::array<std::string_view, 13> kColumns{
        "id",        "age",          "gender",         "disability", "education",
        "income_bucket", "industry", "home_zone",      "work_zone",  "arrival_hour",
        "hours_per_week", "dwelling", "baseline_mode"};
    std::array<std::size_t, kColumns.size()> col{};
    for (std::size_t i = 0; i < kColumns.size(); ++i) {
        col[i] = table.column(kColumns[i]);
    }

    Population pop;
    pop.reserve(table.rows.size());
    std::vector<std::string> errors;
    for (const auto &row : table.rows) {
        const auto where = "row " + std::to_string(row.index);
        if (row.fields.size() != table.header.size()) {
            errors.push_back(where + ": expected " + std::to_string(table.header.size()) +
                             " fields, got " + std::to_string(row.fields.size()));
            continue;
        }
        const auto field = [&](std::size_t k) -> std::string_view { return row.fields[col[k]]; };
        const std::size_t before = errors.size();
        const auto fail = [&](std::size_t k, const std::string &msg) {
            errors.push_back(where + ", field " + std::string(kColumns[k]) + ": " + msg);
        };

        Individual ind;
        if (auto v = to_int(field(0))) {
            ind.id = *v;
        } else {
            fail(0, "not an integer");
        }
        if (auto v = to_int(field(1)); v && *v >= 16 && *v <= 130) {
            ind.age = static_cast<int>(*v);
        } else {
            fail(1, "expected integer age >= 16");
        }
        if (auto v = parse_gender(field(2))) {
            ind.gender = *v;
        } else {
            fail(2, "expected one of " + choices<Gender>(kGenderNames));
        }
        if (auto v = to_bool01(field(3))) {
            ind.has_disability = *v;
        } else {
            fail(3, "expected 0 or 1");
        }
        if (auto v = parse_education(field(4))) {
            ind.education = *v;
        } else {
            fail(4, "expected one of " + choices<Education>(kEducationNames));
        }
        if (auto v = to_int(field(5)); v && *v >= 0 && *v < kIncomeBuckets) {
            ind.income_bucket = static_cast<int>(*v);
        } else {
            fail(5, "expected integer in 0..6, got '" + std::string(field(5)) + "'");
        }
        if (auto v = parse_industry(field(6))) {
            ind.industry = *v;
        } else {
            fail(6, "expected one of " + choices<Industry>(kIndustryNames));
        }
        ind.home_zone = std::string(field(7));
        if (!zones.contains(ind.home_zone)) {
            fail(7, "unknown zone id '" + ind.home_zone + "'");
        }
        ind.work_zone = std::string(field(8));
        if (!zones.contains(ind.work_zone)) {
            fail(8, "unknown zone id '" + ind.work_zone + "'");
        }
        if (auto v = to_int(field(9)); v && *v >= 0 && *v <= 23) {
            ind.arrival_hour = static_cast<int>(*v);
        } else {
            fail(9, "expected integer in 0..23");
        }
        if (auto v = to_real(field(10)); v && *v >= 0.0) {
            ind.hours_per_week = *v;
        } else {
            fail(10, "expected number >= 0");
        }
        if (auto v = parse_dwelling(field(11))) {
            ind.dwelling = *v;
        } else {
            fail(11, "expected one of " + choices<Dwelling>(kDwellingNames));
        }
        if (auto v = parse_mode(field(12))) {
            ind.baseline_mode = *v;
        } else {
            fail(12, "unknown mode '" + std::string(field(12)) + "'");
        }
        if (errors.size() == before) {
            pop.push_back(std::move(ind));
        }
    }
    if (!errors.empty()) {
        for (auto &e : errors) {
            e = path.string() + ": " + e;
        }
        throw ValidationError(std::move(errors));
    }
    return pop;
}

void write_population(const std::filesystem::path &path, const Population &pop) {
    std::vector<std::string> lines;
    lines.reserve(pop.size() + 1);
    lines.emplace_back("id,age,gender,disability,education,income_bucket,industry,home_zone,"
                       "work_zone,arrival_hour,hours_per_week,dwelling,baseline_mode");
    for (const auto &p : pop) {
        std::ostringstream os;
        os << p.id << ',' << p.age << ',' << to_string(p.gender) << ','
           << (p.has_disability ? 1 : 0) << ',' << to_string(p.education) << ','
           << p.income_bucket << ',' << to_string(p.industry) << ',' << p.home_zone << ','
           << p.work_zone << ',' << p.arrival_hour << ',' << csv::format_number(p.hours_per_week)
           << ',' << to_string(p.dwelling) << ',' << to_string(p.baseline_mode);
        lines.push_back(os.str());
    }
    csv::write_lines(path, lines);
}

double commute_distance(const Zone &home, const Zone &work) noexcept {
    return std::hypot(home.centroid_x_km - work.centroid_x_km,
                      home.centroid_y_km - work.centroid_y_km);
}

double commute_distance(const Individual &ind, const ZoneTable &zones) {
    return commute_distance(zones.at(ind.home_zone), zones.at(ind.work_zone));
}

// ---------------------------------------------------------------------------
// Synthesis
// ---------------------------------------------------------------------------

namespace {

constexpr double kWeightTolerance = 1e-9;

template <class T, class Parse>
Categorical<T> parse_categorical(const nlohmann::json &doc, const std::string &field, Parse parse,
                                 std::vector<std::string> &errors) {
    Categorical<T> out;
    std::vector<std::pair<std::string, double>> entries;
    if (doc.contains("values")) {
        const auto &values = doc.at("values");
        const auto &weights = doc.at("weights");
        if (!values.is_array() || !weights.is_array() || values.size() != weights.size()) {
            errors.push_back(field + ": 'values' and 'weights' must be arrays of equal length");
            return out;
        }
        for (std::size_t i = 0; i < values.size(); ++i) {
            auto label = values[i].is_string() ? values[i].get<std::string>() : values[i].dump();
            entries.emplace_back(label, weights[i].get<double>());
        }
    } else if (doc.contains("weights") && doc.at("weights").is_object()) {
        for (const auto &[k, v] : doc.at("weights").items()) {
            entries.emplace_back(k, v.template get<double>());
        }
    } else {
        errors.push_back(field + ": categorical needs 'weights' object or 'values'/'weights'");
        return out;
    }
    if (entries.empty()) {
        errors.push_back(field + ": categorical has no entries");
        return out;
    }
    double sum = 0.0;
    for (const auto &[label, w] : entries) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            errors.push_back(field + ": weight of '" + label + "' must be finite and >= 0");
            return out;
        }
        auto value = parse(label);
        if (!value) {
            errors.push_back(field + ": cannot parse value '" + label + "'");
            return out;
        }
        sum += w;
        out.values.push_back(*value);
        out.cdf.push_back(sum);
    }
    if (std::abs(sum - 1.0) > kWeightTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << field << ": weights sum to " << sum << ", expected 1 (tolerance 1e-9)";
        errors.push_back(os.str());
        return out;
    }
    out.cdf.back() = 1.0;
    return out;
}

IntDistribution parse_int_dist(const nlohmann::json &doc, const std::string &field,
                               std::vector<std::string> &errors) {
    const auto type = doc.value("type", std::string{});
    if (type == "uniform_int") {
        UniformInt u{doc.at("min").get<int>(), doc.at("max").get<int>()};
        if (u.min > u.max) {
            errors.push_back(field + ": min > max");
        }
        return u;
    }
    if (type == "categorical") {
        return parse_categorical<int>(
            doc, field, [](std::string_view s) { return to_int(s); }, errors);
    }
    errors.push_back(field + ": expected type uniform_int or categorical");
    return UniformInt{};
}

RealDistribution parse_real_dist(const nlohmann::json &doc, const std::string &field,
                                 std::vector<std::string> &errors) {
    const auto type = doc.value("type", std::string{});
    if (type == "uniform") {
        UniformReal u{doc.at("min").get<double>(), doc.at("max").get<double>()};
        if (!(u.min <= u.max)) {
            errors.push_back(field + ": min > max");
        }
        return u;
    }
    if (type == "categorical") {
        return parse_categorical<double>(
            doc, field, [](std::string_view s) { return to_real(s); }, errors);
    }
    errors.push_back(field + ": expected type uniform or categorical");
    return UniformReal{};
}

int sample_int(const IntDistribution &d, double u) {
    if (const auto *c = std::get_if<Categorical<int>>(&d)) {
        return c->sample(u);
    }
    const auto &r = std::get<UniformInt>(d);
    const auto span = static_cast<double>(r.max - r.min + 1);
    auto k = static_cast<int>(std::floor(u * span));
    return r.min + std::min(k, r.max - r.min);
}

double sample_real(const RealDistribution &d, double u) {
    if (const auto *c = std::get_if<Categorical<double>>(&d)) {
        return c->sample(u);
    }
    const auto &r = std::get<UniformReal>(d);
    return r.min + u * (r.max - r.min);
}

Individual synthesize_one(std::int64_t id, const SynthesisParams &p, std::uint64_t seed) {
    auto rng = make_stream(seed, static_cast<std::uint64_t>(id), Stream::Synthesis);
    Individual ind;
    ind.id = id;
    ind.age = sample_int(p.age, uniform01(rng));
    ind.gender = p.gender.sample(uniform01(rng));
    ind.has_disability = uniform01(rng) < p.disability_rate;
    ind.education = p.education.sample(uniform01(rng));
    ind.income_bucket = sample_int(p.income_bucket, uniform01(rng));
    ind.industry = p.industry.sample(uniform01(rng));
    ind.home_zone = p.home_zone.sample(uniform01(rng));
    ind.work_zone = p.work_zone.sample(uniform01(rng));
    ind.arrival_hour = sample_int(p.arrival_hour, uniform01(rng));
    ind.hours_per_week = sample_real(p.hours_per_week, uniform01(rng));
    ind.dwelling = p.dwelling.sample(uniform01(rng));
    ind.baseline_mode = p.baseline_mode.sample(uniform01(rng));
    return ind;
}

} // namespace

SynthesisParams parse_synthesis_params(const nlohmann::json &doc) {
    std::vector<std::string> errors;
    SynthesisParams p;
    const auto need = [&](const char *key) -> const nlohmann::json * {
        if (!doc.contains(key)) {
            errors.push_back(std::string(key) + ": missing distribution");
            return nullptr;
        }
        return &doc.at(key);
    };
    try {
        if (auto *d = need("age")) {
            p.age = parse_int_dist(*d, "age", errors);
        }
        if (auto *d = need("gender")) {
            p.gender = parse_categorical<Gender>(*d, "gender", parse_gender, errors);
        }
        if (auto *d = need("disability")) {
            p.disability_rate = d->at("p").get<double>();
            if (!(p.disability_rate >= 0.0 && p.disability_rate <= 1.0)) {
                errors.push_back("disability: p must be in [0,1]");
            }
        }
        if (auto *d = need("education")) {
            p.education = parse_categorical<Education>(*d, "education", parse_education, errors);
        }
        if (auto *d = need("income_bucket")) {
            p.income_bucket = parse_int_dist(*d, "income_bucket", errors);
        }
        if (auto *d = need("industry")) {
            p.industry = parse_categorical<Industry>(*d, "industry", parse_industry, errors);
        }
        const auto as_string = [](std::string_view s) { return std::optional<std::string>(s); };
        if (auto *d = need("home_zone")) {
            p.home_zone = parse_categorical<std::string>(*d, "home_zone", as_string, errors);
        }
        if (auto *d = need("work_zone")) {
            p.work_zone = parse_categorical<std::string>(*d, "work_zone", as_string, errors);
        }
        if (auto *d = need("arrival_hour")) {
            p.arrival_hour = parse_int_dist(*d, "arrival_hour", errors);
        }
        if (auto *d = need("hours_per_week")) {
            p.hours_per_week = parse_real_dist(*d, "hours_per_week", errors);
        }
        if (auto *d = need("dwelling")) {
            p.dwelling = parse_categorical<Dwelling>(*d, "dwelling", parse_dwelling, errors);
        }
        if (auto *d = need("baseline_mode")) {
            p.baseline_mode = parse_categorical<Mode>(*d, "baseline_mode", parse_mode, errors);
        }
    } catch (const nlohmann::json::exception &e) {
        errors.push_back(std::string("synthesis params: ") + e.what());
    }
    if (!errors.empty()) {
        throw ValidationError(std::move(errors));
    }
    return p;
}

SynthesisParams load_synthesis_params(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open synthesis params: " + path.string());
    }
    try {
        return parse_synthesis_params(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error &e) {
        throw ValidationError({path.string() + ": " + e.what()});
    }
}

Population synthesize_population(std::size_t n, const SynthesisParams &params, std::uint64_t seed,
                                 Exec exec) {
    Population pop(n);
    const auto count = static_cast<std::int64_t>(n);
    if (exec == Exec::Serial) {
        for (std::int64_t i = 0; i < count; ++i) {
            pop[static_cast<std::size_t>(i)] = synthesize_one(i + 1, params, seed);
        }
    } else {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < count; ++i) {
            pop[static_cast<std::size_t>(i)] = synthesize_one(i + 1, params, seed);
        }
    }
    return pop;
}

} // namespace evc
