#include "heatcast/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

#include "heatcast/errors.hpp"

namespace heatcast::csv {

int Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == delimiter) {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

Table read_delimited(std::istream& in, char delimiter) {
    Table table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (first) {
            table.header = split_line(line, delimiter);
            first = false;
            continue;
        }
        if (line.empty()) continue;
        table.rows.push_back(split_line(line, delimiter));
    }
    if (first) throw DataError("delimited input has no header row");
    return table;
}

Table read_delimited_file(const std::filesystem::path& path, char delimiter) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return read_delimited(in, delimiter);
}

void write_row(std::ostream& out, std::span<const std::string> fields, char delimiter) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out << delimiter;
        const std::string& f = fields[i];
        if (f.find(delimiter) != std::string::npos || f.find('"') != std::string::npos) {
            out << '"';
            for (char c : f) {
                if (c == '"') out << '"';
                out << c;
            }
            out << '"';
        } else {
            out << f;
        }
    }
    out << '\n';
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    char buf[40];
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
        if (std::strtod(buf, nullptr) == value) break;
    }
    return buf;
}

double parse_double(std::string_view field) {
    // strtod wants a terminated buffer; fields are short
    const std::string s(field);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw DataError("bad numeric field '" + s + "'");
    }
    return v;
}

long parse_long(std::string_view field) {
    const std::string s(field);
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw DataError("bad integer field '" + s + "'");
    }
    return v;
}

}  // namespace heatcast::csv
