#pragma once

#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace heatcast::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; -1 when absent.
    int column(std::string_view name) const;
};

/// Minimal delimited-text reader: one record per line, double-quoted fields
/// may embed the delimiter. The first line is the header.
Table read_delimited(std::istream& in, char delimiter = ',');
Table read_delimited_file(const std::filesystem::path& path, char delimiter = ',');

std::vector<std::string> split_line(const std::string& line, char delimiter);

void write_row(std::ostream& out, std::span<const std::string> fields, char delimiter = ',');
inline void write_row(std::ostream& out, std::initializer_list<std::string> fields,
                      char delimiter = ',') {
    write_row(out, std::span<const std::string>(fields.begin(), fields.size()), delimiter);
}

/// Shortest decimal representation that round-trips to the same double.
/// Used for every CSV/report number so artifact bytes are reproducible.
std::string format_double(double value);

/// Strict double parse of a whole field. Throws DataError.
double parse_double(std::string_view field);

/// Strict integer parse of a whole field. Throws DataError.
long parse_long(std::string_view field);

}  // namespace heatcast::csv
