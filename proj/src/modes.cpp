#include "evc/modes.hpp"

#include <cctype>

namespace evc {

namespace {

constexpr std::array<std::string_view, kModeCount> kModeNames{
    "Subway", "Rail", "Bus", "Ferry", "PrivateEV", "Taxi",
    "Motorcycle", "EBike", "Walk", "Scooter", "WFH"};

constexpr std::array<std::string_view, kCategoryCount> kCategoryNames{"Transit", "Car",
                                                                      "Micromobility", "WFH"};

} // namespace

std::string_view to_string(Mode m) noexcept { return kModeNames[index_of(m)]; }
std::string_view to_string(Category c) noexcept { return kCategoryNames[index_of(c)]; }

std::optional<Mode> parse_mode(std::string_view s) noexcept {
    for (std::size_t i = 0; i < kModeNames.size(); ++i) {
        if (kModeNames[i] == s) {
            return kAllModes[i];
        }
    }
    return std::nullopt;
}

std::optional<Category> parse_category(std::string_view s) noexcept {
    for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
        if (kCategoryNames[i] == s) {
            return kAllCategories[i];
        }
    }
    return std::nullopt;
}

std::string column_name(Category c) {
    std::string out{to_string(c)};
    for (auto &ch : out) {
        ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    return out;
}

} // namespace evc
