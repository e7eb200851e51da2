#include "heatcast/dates.hpp"

#include <charconv>
#include <cstdio>

#include "heatcast/errors.hpp"

namespace heatcast {

namespace {

int parse_int_field(std::string_view s) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw DataError("bad numeric date field '" + std::string(s) + "'");
    }
    return value;
}

}  // namespace

CalendarDate parse_iso_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw DataError("expected YYYY-MM-DD date, got '" + std::string(text) + "'");
    }
    const int y = parse_int_field(text.substr(0, 4));
    const int m = parse_int_field(text.substr(5, 2));
    const int d = parse_int_field(text.substr(8, 2));
    const CalendarDate date = std::chrono::year{y} / m / d;
    if (!date.ok()) throw DataError("non-existent calendar date '" + std::string(text) + "'");
    return date;
}

std::string format_iso_date(CalendarDate date) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

CalendarDate add_days(CalendarDate date, int days) {
    return CalendarDate{std::chrono::sys_days(date) + std::chrono::days(days)};
}

int days_between(CalendarDate a, CalendarDate b) {
    return static_cast<int>((std::chrono::sys_days(b) - std::chrono::sys_days(a)).count());
}

}  // namespace heatcast
