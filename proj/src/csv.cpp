#include "evc/csv.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "evc/error.hpp"

namespace evc {

namespace {

std::string join(const std::vector<std::string> &lines) {
    std::string out;
    for (const auto &l : lines) {
        if (!out.empty()) {
            out += "; ";
        }
        out += l;
    }
    return out;
}

} // namespace

ValidationError::ValidationError(std::vector<std::string> diagnostics)
    : Error(join(diagnostics)), diagnostics_(std::move(diagnostics)) {}

namespace csv {

std::string_view trim(std::string_view s) noexcept {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(trim(line.substr(start)));
            break;
        }
        out.emplace_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

Table parse(std::string_view text, const std::filesystem::path &source) {
    Table table;
    table.source = source;
    std::size_t line_no = 0;
    std::size_t data_index = 0;
    std::size_t start = 0;
    bool have_header = false;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        auto line = trim(text.substr(start, end - start));
        ++line_no;
        start = end + 1;
        if (line.empty()) {
            if (end == text.size()) {
                break;
            }
            continue;
        }
        if (!have_header) {
            // tolerate a UTF-8 byte order mark
            if (line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") {
                line.remove_prefix(3);
            }
            table.header = split(line);
            have_header = true;
        } else {
            table.rows.push_back(Row{line_no, ++data_index, split(line)});
        }
        if (end == text.size()) {
            break;
        }
    }
    return table;
}

Table read(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open file: " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    auto table = parse(ss.str(), path);
    if (table.header.empty()) {
        throw ValidationError({path.string() + ": missing header row"});
    }
    return table;
}

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw ValidationError({source.string() + ": missing column '" + std::string(name) + "'"});
}

std::string format_number(double v) {
    if (v == 0.0) {
        return "0"; // also folds -0
    }
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) {
        return "nan";
    }
    return std::string(buf.data(), ptr);
}

void write_lines(const std::filesystem::path &path, std::span<const std::string> lines) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write file: " + path.string());
    }
    for (const auto &l : lines) {
        out << l << '\n';
    }
    if (!out) {
        throw Error("write failed: " + path.string());
    }
}

} // namespace csv
} // namespace evc
