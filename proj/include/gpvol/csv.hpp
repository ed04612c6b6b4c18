#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gpvol {

namespace csv {

/// Minimal comma-separated table: no quoting, no embedded commas.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(std::string_view name) const;
};

/// First non-empty line is the header. Blank lines and lines starting with
/// '#' are skipped. Cells are trimmed of surrounding whitespace.
Table parse(std::string_view text);

/// Shortest representation that parses back to the same double.
std::string format_number(double value);

}  // namespace csv

namespace kv {

/// Flat key=value text. '#' starts a comment line; keys are unique.
using Map = std::map<std::string, std::string, std::less<>>;

/// Throws ParseError on a line without '=' or a duplicate key.
Map parse(std::string_view text);
std::string write(const Map& entries);

}  // namespace kv

/// Whole-file helpers. Throws std::runtime_error naming the path on I/O failure.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace gpvol
