#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "heatcast/dates.hpp"
#include "heatcast/matrix.hpp"

namespace heatcast::ingest {

/// One station observation at a 2AM or 2PM solar timestamp. Individual
/// measurements may be missing; a present value always satisfies its range
/// invariant (rows that do not are rejected at parse time).
struct WeatherRecord {
    CalendarDate date{};
    int hour = 14;  // 2 or 14

    std::optional<double> wind_dir;      // degrees from true north, [0, 360)
    std::optional<double> wind_speed;    // m/s, >= 0
    std::optional<double> air_temp;      // celsius
    std::optional<double> pressure;      // hPa, > 0
    std::optional<double> visibility;    // meters, >= 0
    std::optional<double> dew_point;     // celsius
    std::optional<double> rel_humidity;  // percent, [0, 100]

    bool complete_predictors() const;
    /// The seven weather predictors in declaration order; requires complete_predictors().
    std::array<double, 7> predictor_values() const;
};

/// Maps input columns to WeatherRecord fields.
/// timestamp_format: "iso_date" (YYYY-MM-DD + separate hour column),
/// "compact_date" (YYYYMMDD + separate hour column), or "iso_datetime"
/// (YYYY-MM-DD HH:MM or YYYY-MM-DDTHH:MM in the date column; hour column unused).
struct ColumnMap {
    std::string date = "date";
    std::string hour = "hour";
    std::string wind_dir = "wind_dir";
    std::string wind_speed = "wind_speed";
    std::string air_temp = "air_temp";
    std::string pressure = "pressure";
    std::string visibility = "visibility";
    std::string dew_point = "dew_point";
    std::string rel_humidity = "rel_humidity";
    std::string timestamp_format = "iso_date";
    char delimiter = ',';
    /// Field contents treated as missing, in addition to the empty field.
    std::vector<std::string> missing_sentinels = {"NA", "9999", "99999", "999.9", "9999.9"};
};

struct RowDiagnostic {
    std::size_t row_number;  // 1-based data-row number (header excluded)
    std::string message;
};

struct ParseResult {
    std::vector<WeatherRecord> records;  // sorted by (date, hour)
    std::vector<RowDiagnostic> diagnostics;
};

/// Parse delimited station observations. Rows with out-of-range values,
/// duplicate (date, hour) keys, or unusable timestamps are dropped with a
/// diagnostic. Throws DataError when the header is missing a mapped column
/// or when more than 10% of data rows are unparseable.
ParseResult parse_station_csv(std::istream& source, const ColumnMap& schema);

constexpr int kPredictorCount = 8;  // 7 lagged weather predictors + day counter

struct SupervisedRow {
    int day_index = 0;    // t, 1-based within the frame
    CalendarDate date{};
    int day_counter = 0;  // == day_index
    std::optional<std::array<double, kPredictorCount>> predictors;  // lagged; x8 = day_counter
    std::optional<double> y_pm;  // 14:00 temperature of this day
    std::optional<double> y_am;  // 02:00 temperature of this day
};

/// One row per calendar day of the analysis window, aligned so that
/// predictors of day t come from the 14:00 record exactly lag_days earlier.
struct SupervisedFrame {
    std::vector<SupervisedRow> rows;
    int lag_days = 14;
    CalendarDate start_date{};
    CalendarDate end_date{};

    /// Indices of rows usable for supervised training (complete predictors + y_pm).
    std::vector<std::size_t> complete_rows() const;
    /// Predictor matrix over the given rows.
    Matrix predictor_matrix(const std::vector<std::size_t>& row_indices) const;
    std::vector<double> pm_response(const std::vector<std::size_t>& row_indices) const;
};

/// Assemble the lagged supervised frame. Records must cover
/// [start - lag_days, end] for full predictor coverage; days without data
/// stay in the frame as missing rows. Throws DataError for an empty window
/// or when no row ends up usable.
SupervisedFrame build_frame(const std::vector<WeatherRecord>& records, int lag_days,
                            CalendarDate analysis_start, CalendarDate analysis_end);

/// Canonical frame CSV: t,date,day_counter,x1..x8,y_pm,y_am with empty
/// fields for missing values. This is the golden-file format shared by the
/// CLI and the test suites.
void write_frame_csv(const SupervisedFrame& frame, std::ostream& out);
SupervisedFrame read_frame_csv(std::istream& in);

}  // namespace heatcast::ingest
