#include "heatcast/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "heatcast/csv.hpp"
#include "heatcast/errors.hpp"

namespace heatcast::ingest {

bool WeatherRecord::complete_predictors() const {
    return wind_dir && wind_speed && air_temp && pressure && visibility && dew_point &&
           rel_humidity;
}

std::array<double, 7> WeatherRecord::predictor_values() const {
    return {*wind_dir, *wind_speed, *air_temp, *pressure, *visibility, *dew_point, *rel_humidity};
}

namespace {

struct FieldSpec {
    std::string name;
    int column;
    std::optional<double> WeatherRecord::* member;
    double min;
    double max;
    bool min_inclusive;
    bool max_inclusive;
};

bool is_missing(const std::string& field, const ColumnMap& schema) {
    if (field.empty()) return true;
    return std::find(schema.missing_sentinels.begin(), schema.missing_sentinels.end(), field) !=
           schema.missing_sentinels.end();
}

int require_column(const csv::Table& table, const std::string& name) {
    const int idx = table.column(name);
    if (idx < 0) throw DataError("schema error: header has no column '" + name + "'");
    return idx;
}

CalendarDate parse_compact_date(const std::string& s) {
    if (s.size() != 8) throw DataError("expected YYYYMMDD date, got '" + s + "'");
    return parse_iso_date(s.substr(0, 4) + "-" + s.substr(4, 2) + "-" + s.substr(6, 2));
}

std::pair<CalendarDate, int> parse_iso_datetime(const std::string& s) {
    if (s.size() < 13 || (s[10] != 'T' && s[10] != ' ')) {
        throw DataError("expected YYYY-MM-DD[T ]HH:MM timestamp, got '" + s + "'");
    }
    const CalendarDate date = parse_iso_date(std::string_view(s).substr(0, 10));
    const int hour = static_cast<int>(csv::parse_long(s.substr(11, 2)));
    return {date, hour};
}

int parse_hour_field(const std::string& s) {
    const auto colon = s.find(':');
    return static_cast<int>(csv::parse_long(colon == std::string::npos ? s : s.substr(0, colon)));
}

}  // namespace

ParseResult parse_station_csv(std::istream& source, const ColumnMap& schema) {
    const csv::Table table = csv::read_delimited(source, schema.delimiter);

    const int date_col = require_column(table, schema.date);
    const bool embedded_hour = schema.timestamp_format == "iso_datetime";
    const int hour_col = embedded_hour ? -1 : require_column(table, schema.hour);
    if (!embedded_hour && schema.timestamp_format != "iso_date" &&
        schema.timestamp_format != "compact_date") {
        throw ConfigError("unknown timestamp_format '" + schema.timestamp_format + "'");
    }

    const std::vector<FieldSpec> fields = {
        {"wind_dir", require_column(table, schema.wind_dir), &WeatherRecord::wind_dir, 0.0, 360.0,
         true, false},
        {"wind_speed", require_column(table, schema.wind_speed), &WeatherRecord::wind_speed, 0.0,
         std::numeric_limits<double>::infinity(), true, true},
        {"air_temp", require_column(table, schema.air_temp), &WeatherRecord::air_temp,
         -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), true,
         true},
        {"pressure", require_column(table, schema.pressure), &WeatherRecord::pressure, 0.0,
         std::numeric_limits<double>::infinity(), false, true},
        {"visibility", require_column(table, schema.visibility), &WeatherRecord::visibility, 0.0,
         std::numeric_limits<double>::infinity(), true, true},
        {"dew_point", require_column(table, schema.dew_point), &WeatherRecord::dew_point,
         -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), true,
         true},
        {"rel_humidity", require_column(table, schema.rel_humidity), &WeatherRecord::rel_humidity,
         0.0, 100.0, true, true},
    };

    ParseResult result;
    std::set<std::pair<std::chrono::sys_days, int>> seen;
    std::size_t unparseable = 0;

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t row_number = r + 1;
        if (row.size() != table.header.size()) {
            result.diagnostics.push_back({row_number, "field count mismatch"});
            ++unparseable;
            continue;
        }

        WeatherRecord rec;
        try {
            if (embedded_hour) {
                auto [date, hour] = parse_iso_datetime(row[static_cast<std::size_t>(date_col)]);
                rec.date = date;
                rec.hour = hour;
            } else {
                const std::string& ds = row[static_cast<std::size_t>(date_col)];
                rec.date = schema.timestamp_format == "compact_date" ? parse_compact_date(ds)
                                                                     : parse_iso_date(ds);
                rec.hour = parse_hour_field(row[static_cast<std::size_t>(hour_col)]);
            }
        } catch (const DataError& e) {
            result.diagnostics.push_back({row_number, std::string("timestamp: ") + e.what()});
            ++unparseable;
            continue;
        }

        if (rec.hour != 2 && rec.hour != 14) {
            result.diagnostics.push_back(
                {row_number, "hour " + std::to_string(rec.hour) + " is not a 2AM/2PM solar time"});
            continue;
        }

        bool rejected = false;
        for (const FieldSpec& spec : fields) {
            const std::string& field = row[static_cast<std::size_t>(spec.column)];
            if (is_missing(field, schema)) continue;
            double value;
            try {
                value = csv::parse_double(field);
            } catch (const DataError&) {
                result.diagnostics.push_back({row_number, spec.name + ": unparseable '" + field + "'"});
                ++unparseable;
                rejected = true;
                break;
            }
            const bool below = spec.min_inclusive ? value < spec.min : value <= spec.min;
            const bool above = spec.max_inclusive ? value > spec.max : value >= spec.max;
            if (below || above || !std::isfinite(value)) {
                result.diagnostics.push_back(
                    {row_number, spec.name + " = " + field + " violates its range"});
                rejected = true;
                break;
            }
            rec.*(spec.member) = value;
        }
        if (rejected) continue;

        if (!seen.insert({std::chrono::sys_days(rec.date), rec.hour}).second) {
            result.diagnostics.push_back(
                {row_number, "duplicate observation for " + format_iso_date(rec.date) + " hour " +
                                 std::to_string(rec.hour)});
            continue;
        }
        result.records.push_back(rec);
    }

    if (!table.rows.empty() &&
        static_cast<double>(unparseable) > 0.10 * static_cast<double>(table.rows.size())) {
        throw DataError("more than 10% of data rows are unparseable (" +
                        std::to_string(unparseable) + " of " + std::to_string(table.rows.size()) +
                        ")");
    }

    std::sort(result.records.begin(), result.records.end(),
              [](const WeatherRecord& a, const WeatherRecord& b) {
                  const auto da = std::chrono::sys_days(a.date);
                  const auto db = std::chrono::sys_days(b.date);
                  return da != db ? da < db : a.hour < b.hour;
              });
    return result;
}

std::vector<std::size_t> SupervisedFrame::complete_rows() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].predictors && rows[i].y_pm) out.push_back(i);
    }
    return out;
}

Matrix SupervisedFrame::predictor_matrix(const std::vector<std::size_t>& row_indices) const {
    Matrix x(row_indices.size(), kPredictorCount);
    for (std::size_t i = 0; i < row_indices.size(); ++i) {
        const auto& p = *rows[row_indices[i]].predictors;
        std::copy(p.begin(), p.end(), x.row(i).begin());
    }
    return x;
}

std::vector<double> SupervisedFrame::pm_response(const std::vector<std::size_t>& row_indices) const {
    std::vector<double> y;
    y.reserve(row_indices.size());
    for (std::size_t i : row_indices) y.push_back(*rows[i].y_pm);
    return y;
}

SupervisedFrame build_frame(const std::vector<WeatherRecord>& records, int lag_days,
                            CalendarDate analysis_start, CalendarDate analysis_end) {
    if (lag_days < 0) throw ConfigError("lag_days must be >= 0");
    const int window = days_between(analysis_start, analysis_end) + 1;
    if (window <= 0) throw DataError("empty analysis window");

    std::map<std::pair<std::chrono::sys_days, int>, const WeatherRecord*> index;
    for (const WeatherRecord& r : records) {
        index[{std::chrono::sys_days(r.date), r.hour}] = &r;
    }
    auto lookup = [&](CalendarDate d, int hour) -> const WeatherRecord* {
        const auto it = index.find({std::chrono::sys_days(d), hour});
        return it == index.end() ? nullptr : it->second;
    };

    SupervisedFrame frame;
    frame.lag_days = lag_days;
    frame.start_date = analysis_start;
    frame.end_date = analysis_end;
    frame.rows.reserve(static_cast<std::size_t>(window));

    for (int t = 1; t <= window; ++t) {
        SupervisedRow row;
        row.day_index = t;
        row.date = add_days(analysis_start, t - 1);
        row.day_counter = t;

        if (const WeatherRecord* lagged = lookup(add_days(row.date, -lag_days), 14);
            lagged && lagged->complete_predictors()) {
            std::array<double, kPredictorCount> x{};
            const auto weather = lagged->predictor_values();
            std::copy(weather.begin(), weather.end(), x.begin());
            x[7] = static_cast<double>(row.day_counter);
            row.predictors = x;
        }
        if (const WeatherRecord* pm = lookup(row.date, 14); pm && pm->air_temp) {
            row.y_pm = *pm->air_temp;
        }
        if (const WeatherRecord* am = lookup(row.date, 2); am && am->air_temp) {
            row.y_am = *am->air_temp;
        }
        frame.rows.push_back(row);
    }

    if (frame.complete_rows().empty()) {
        throw DataError("no usable rows: every day lacks either the lagged predictors or the "
                        "14:00 response");
    }
    return frame;
}

void write_frame_csv(const SupervisedFrame& frame, std::ostream& out) {
    std::vector<std::string> fields = {"t",  "date", "day_counter", "x1",   "x2",  "x3", "x4",
                                       "x5", "x6",   "x7",          "x8",   "y_pm", "y_am"};
    csv::write_row(out, fields, ',');
    for (const SupervisedRow& row : frame.rows) {
        fields.clear();
        fields.push_back(std::to_string(row.day_index));
        fields.push_back(format_iso_date(row.date));
        fields.push_back(std::to_string(row.day_counter));
        for (int j = 0; j < kPredictorCount; ++j) {
            fields.push_back(row.predictors ? csv::format_double((*row.predictors)[static_cast<std::size_t>(j)])
                                            : std::string());
        }
        fields.push_back(row.y_pm ? csv::format_double(*row.y_pm) : std::string());
        fields.push_back(row.y_am ? csv::format_double(*row.y_am) : std::string());
        csv::write_row(out, fields, ',');
    }
}

SupervisedFrame read_frame_csv(std::istream& in) {
    const csv::Table table = csv::read_delimited(in, ',');
    const std::vector<std::string> expected = {"t",  "date", "day_counter", "x1",   "x2",  "x3",
                                               "x4", "x5",   "x6",          "x7",   "x8",  "y_pm",
                                               "y_am"};
    if (table.header != expected) throw DataError("not a canonical frame CSV (header mismatch)");

    SupervisedFrame frame;
    for (const auto& row : table.rows) {
        if (row.size() != expected.size()) throw DataError("frame CSV row with wrong field count");
        SupervisedRow r;
        r.day_index = static_cast<int>(csv::parse_long(row[0]));
        r.date = parse_iso_date(row[1]);
        r.day_counter = static_cast<int>(csv::parse_long(row[2]));
        bool any_missing = false;
        std::array<double, kPredictorCount> x{};
        for (int j = 0; j < kPredictorCount; ++j) {
            const std::string& f = row[static_cast<std::size_t>(3 + j)];
            if (f.empty()) {
                any_missing = true;
            } else {
                x[static_cast<std::size_t>(j)] = csv::parse_double(f);
            }
        }
        if (!any_missing) r.predictors = x;
        if (!row[11].empty()) r.y_pm = csv::parse_double(row[11]);
        if (!row[12].empty()) r.y_am = csv::parse_double(row[12]);
        frame.rows.push_back(r);
    }
    if (frame.rows.empty()) throw DataError("frame CSV has no rows");
    frame.start_date = frame.rows.front().date;
    frame.end_date = frame.rows.back().date;
    return frame;
}

}  // namespace heatcast::ingest
