#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace heatcast {

using CalendarDate = std::chrono::year_month_day;

/// Parse "YYYY-MM-DD". Throws DataError on malformed or non-existent dates.
CalendarDate parse_iso_date(std::string_view text);

/// "YYYY-MM-DD".
std::string format_iso_date(CalendarDate date);

CalendarDate add_days(CalendarDate date, int days);

/// b - a in calendar days.
int days_between(CalendarDate a, CalendarDate b);

}  // namespace heatcast
