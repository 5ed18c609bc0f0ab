#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include <json.hpp>

#include "evc/exec.hpp"
#include "evc/modes.hpp"

namespace evc {

enum class RegionTag { Manhattan, Bronx, Queens, Brooklyn, StatenIsland, NorthNJ, Other };
enum class Gender { Female, Male, Other };
enum class Education { NotCollege, College };
enum class Industry { WhiteCollar, Service, BlueCollar };
enum class Dwelling { SingleFamilyOwned, Apartment };

std::string_view to_string(RegionTag v) noexcept;
std::string_view to_string(Gender v) noexcept;
std::string_view to_string(Education v) noexcept;
std::string_view to_string(Industry v) noexcept;
std::string_view to_string(Dwelling v) noexcept;

std::optional<RegionTag> parse_region(std::string_view s) noexcept;
std::optional<Gender> parse_gender(std::string_view s) noexcept;
std::optional<Education> parse_education(std::string_view s) noexcept;
std::optional<Industry> parse_industry(std::string_view s) noexcept;
std::optional<Dwelling> parse_dwelling(std::string_view s) noexcept;

inline constexpr int kIncomeBuckets = 7;

/// Census-style area with a planar centroid in km.
struct Zone {
    std::string id;
    double centroid_x_km = 0.0;
    double centroid_y_km = 0.0;
    RegionTag region = RegionTag::Other;
    bool bike_accessible = false;

    bool operator==(const Zone &) const = default;
};

class ZoneTable {
  public:
    ZoneTable() = default;
    /// Throws ValidationError on duplicate ids or non-finite centroids.
    explicit ZoneTable(std::vector<Zone> zones);

    const Zone *find(std::string_view id) const noexcept;
    const Zone &at(std::string_view id) const;
    bool contains(std::string_view id) const noexcept { return find(id) != nullptr; }

    std::size_t size() const noexcept { return zones_.size(); }
    const std::vector<Zone> &zones() const noexcept { return zones_; }
    auto begin() const noexcept { return zones_.begin(); }
    auto end() const noexcept { return zones_.end(); }

  private:
    std::vector<Zone> zones_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// One commuter.
struct Individual {
    std::int64_t id = 0;
    int age = 16;
    Gender gender = Gender::Other;
    bool has_disability = false;
    Education education = Education::NotCollege;
    int income_bucket = 0; ///< 0 = $0-25k ... 6 = >= $200k
    Industry industry = Industry::WhiteCollar;
    std::string home_zone;
    std::string work_zone;
    int arrival_hour = 9;
    double hours_per_week = 40.0;
    Dwelling dwelling = Dwelling::Apartment;
    Mode baseline_mode = Mode::Subway;

    bool operator==(const Individual &) const = default;
};

using Population = std::vector<Individual>;

ZoneTable load_zones(const std::filesystem::path &path);

/// Reads the population CSV. Every failing row is reported (row index and
/// field) in a single ValidationError.
Population load_population(const std::filesystem::path &path, const ZoneTable &zones);
void write_population(const std::filesystem::path &path, const Population &pop);

/// Invariant violations of one individual; empty when valid.
std::vector<std::string> check_individual(const Individual &ind, const ZoneTable &zones);

/// Euclidean distance between centroids, km.
double commute_distance(const Zone &home, const Zone &work) noexcept;
double commute_distance(const Individual &ind, const ZoneTable &zones);

// ---------------------------------------------------------------------------
// Synthesis
// ---------------------------------------------------------------------------

/// Discrete distribution over labelled values, sampled by inverse CDF.
template <class T> struct Categorical {
    std::vector<T> values;
    std::vector<double> cdf; ///< cumulative weights; last entry is 1

    const T &sample(double u) const {
        std::size_t k = 0;
        while (k + 1 < cdf.size() && u >= cdf[k]) {
            ++k;
        }
        return values[k];
    }
};

struct UniformInt {
    int min = 0;
    int max = 0; ///< inclusive
};

struct UniformReal {
    double min = 0.0;
    double max = 0.0;
};

using IntDistribution = std::variant<Categorical<int>, UniformInt>;
using RealDistribution = std::variant<Categorical<double>, UniformReal>;

/// Marginal distribution per Individual field. Fields are sampled
/// independently from a per-individual random stream.
struct SynthesisParams {
    IntDistribution age = UniformInt{18, 70};
    Categorical<Gender> gender;
    double disability_rate = 0.0;
    Categorical<Education> education;
    IntDistribution income_bucket = UniformInt{0, 6};
    Categorical<Industry> industry;
    Categorical<std::string> home_zone;
    Categorical<std::string> work_zone;
    IntDistribution arrival_hour = UniformInt{8, 9};
    RealDistribution hours_per_week = UniformReal{40.0, 40.0};
    Categorical<Dwelling> dwelling;
    Categorical<Mode> baseline_mode;
};

/// Parses the JSON document; throws ValidationError when a categorical's
/// weights do not sum to 1 within 1e-9 or a label does not parse.
SynthesisParams parse_synthesis_params(const nlohmann::json &doc);
SynthesisParams load_synthesis_params(const std::filesystem::path &path);

/// Deterministic in (n, params, seed) regardless of thread count. Individual
/// ids are 1..n.
Population synthesize_population(std::size_t n, const SynthesisParams &params, std::uint64_t seed,
                                 Exec exec = Exec::Parallel);

} // namespace evc
