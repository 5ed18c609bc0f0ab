#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace evc {

enum class Category { Transit, Car, Micromobility, WFH };

/// Sub-modes; WFH is its own category with a single member.
enum class Mode { Subway, Rail, Bus, Ferry, PrivateEV, Taxi, Motorcycle, EBike, Walk, Scooter, WFH };

inline constexpr std::size_t kModeCount = 11;
inline constexpr std::size_t kCategoryCount = 4;

inline constexpr std::array<Mode, kModeCount> kAllModes{
    Mode::Subway,     Mode::Rail,  Mode::Bus,  Mode::Ferry,   Mode::PrivateEV, Mode::Taxi,
    Mode::Motorcycle, Mode::EBike, Mode::Walk, Mode::Scooter, Mode::WFH};

inline constexpr std::array<Category, kCategoryCount> kAllCategories{
    Category::Transit, Category::Car, Category::Micromobility, Category::WFH};

constexpr Category category_of(Mode m) noexcept {
    switch (m) {
    case Mode::Subway:
    case Mode::Rail:
    case Mode::Bus:
    case Mode::Ferry:
        return Category::Transit;
    case Mode::PrivateEV:
    case Mode::Taxi:
    case Mode::Motorcycle:
        return Category::Car;
    case Mode::EBike:
    case Mode::Walk:
    case Mode::Scooter:
        return Category::Micromobility;
    case Mode::WFH:
        return Category::WFH;
    }
    return Category::WFH;
}

constexpr std::size_t index_of(Mode m) noexcept { return static_cast<std::size_t>(m); }
constexpr std::size_t index_of(Category c) noexcept { return static_cast<std::size_t>(c); }

std::string_view to_string(Mode m) noexcept;
std::string_view to_string(Category c) noexcept;
std::optional<Mode> parse_mode(std::string_view s) noexcept;
std::optional<Category> parse_category(std::string_view s) noexcept;

/// Lowercase snake name used in CSV column headers ("car", "micromobility").
std::string column_name(Category c);

/// Fixed-capacity set of modes, iterated in enum order.
class ModeSet {
  public:
    constexpr ModeSet() = default;

    constexpr void insert(Mode m) noexcept { bits_ |= bit(m); }
    constexpr void erase(Mode m) noexcept { bits_ &= ~bit(m); }
    constexpr bool contains(Mode m) const noexcept { return (bits_ & bit(m)) != 0; }
    constexpr bool empty() const noexcept { return bits_ == 0; }
    constexpr std::size_t size() const noexcept {
        std::size_t n = 0;
        for (auto m : kAllModes) {
            n += contains(m) ? 1 : 0;
        }
        return n;
    }
    constexpr std::size_t count(Category c) const noexcept {
        std::size_t n = 0;
        for (auto m : kAllModes) {
            n += (contains(m) && category_of(m) == c) ? 1 : 0;
        }
        return n;
    }
    constexpr bool is_subset_of(const ModeSet &other) const noexcept {
        return (bits_ & ~other.bits_) == 0;
    }
    constexpr bool operator==(const ModeSet &) const = default;

  private:
    static constexpr unsigned bit(Mode m) noexcept { return 1U << static_cast<unsigned>(m); }
    unsigned bits_ = 0;
};

} // namespace evc
