#include "gpvol/csv.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gpvol/errors.hpp"

namespace gpvol {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename F>
void for_each_line(std::string_view text, F&& f) {
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
        ++line_no;
        f(text.substr(pos, end - pos), line_no);
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
}

}  // namespace

namespace csv {

std::optional<std::size_t> Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    return std::nullopt;
}

Table parse(std::string_view text) {
    Table table;
    bool have_header = false;
    for_each_line(text, [&](std::string_view line, std::size_t) {
        line = trim(line);
        if (line.empty() || line.front() == '#') return;
        std::vector<std::string> cells;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            cells.emplace_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        if (!have_header) {
            table.header = std::move(cells);
            have_header = true;
        } else {
            table.rows.push_back(std::move(cells));
        }
    });
    if (!have_header) throw ParseError("CSV input has no header row");
    return table;
}

std::string format_number(double value) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

}  // namespace csv

namespace kv {

Map parse(std::string_view text) {
    Map out;
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        line = trim(line);
        if (line.empty() || line.front() == '#') return;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError("line " + std::to_string(line_no) + ": expected key=value");
        }
        std::string key(trim(line.substr(0, eq)));
        if (key.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty key");
        if (out.contains(key)) throw ParseError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        out.emplace(std::move(key), std::string(trim(line.substr(eq + 1))));
    });
    return out;
}

std::string write(const Map& entries) {
    std::string out;
    for (const auto& [k, v] : entries) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

}  // namespace kv

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace gpvol
