#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evc::csv {

struct Row {
    std::size_t line = 0; ///< 1-based line number in the file
    std::size_t index = 0; ///< 1-based data row index (header excluded)
    std::vector<std::string> fields;
};

struct Table {
    std::vector<std::string> header;
    std::vector<Row> rows;

    /// Column position by name; throws ValidationError naming the file if absent.
    std::size_t column(std::string_view name) const;
    std::filesystem::path source;
};

/// Plain comma-separated reader: no quoting, CRLF tolerated, blank lines skipped.
Table read(const std::filesystem::path &path);
Table parse(std::string_view text, const std::filesystem::path &source = {});

std::vector<std::string> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s) noexcept;

/// Shortest round-trip decimal representation.
std::string format_number(double v);

void write_lines(const std::filesystem::path &path, std::span<const std::string> lines);

} // namespace evc::csv
