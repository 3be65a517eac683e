#include "sgame/calendar.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <stdexcept>

namespace sgame {

// Howard Hinnant's civil-date algorithms.
std::int64_t days_from_civil(const CivilDate& d) {
    std::int64_t y = d.year;
    const int m = d.month;
    const int day = d.day;
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(day) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

int weekday_mon0(const CivilDate& d) {
    // day 0 (1970-01-01) was a Thursday
    std::int64_t days = days_from_civil(d);
    return static_cast<int>(((days % 7) + 7 + 3) % 7);
}

bool is_weekend_daytype(const CivilDate& d, const std::vector<CivilDate>& holidays) {
    if (is_saturday_or_sunday(d)) return true;
    return std::find(holidays.begin(), holidays.end(), d) != holidays.end();
}

bool DateRange::overlaps(const DateRange& other) const {
    if (empty() || other.empty()) return false;
    return !(last < other.first) && !(other.last < first);
}

namespace {

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    return true;
}

void validate_date(const CivilDate& d) {
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) {
        throw std::invalid_argument("invalid calendar date");
    }
    // round-trip check catches day-of-month overflow (e.g. Feb 30)
    if (civil_from_days(days_from_civil(d)) != d) {
        throw std::invalid_argument("invalid calendar date");
    }
}

}  // namespace

CivilDate parse_date(const std::string& text) {
    int y = 0, mo = 0, da = 0;
    char dash1 = 0, dash2 = 0;
    if (std::sscanf(text.c_str(), "%d%c%d%c%d", &y, &dash1, &mo, &dash2, &da) != 5 ||
        dash1 != '-' || dash2 != '-') {
        throw std::invalid_argument("unparseable date: '" + text + "'");
    }
    CivilDate d{y, mo, da};
    validate_date(d);
    return d;
}

Minute parse_timestamp(const std::string& text) {
    if (all_digits(text)) {
        return static_cast<Minute>(std::stoll(text));
    }
    int y = 0, mo = 0, da = 0, hh = 0, mm = 0, ss = 0;
    char sep = 0;
    int n = std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d", &y, &mo, &da, &sep, &hh, &mm, &ss);
    if (n >= 6) {
        if (sep != 'T' && sep != ' ') {
            throw std::invalid_argument("unparseable timestamp: '" + text + "'");
        }
        if (hh < 0 || hh > 23 || mm < 0 || mm > 59 || ss < 0 || ss > 60) {
            throw std::invalid_argument("timestamp fields out of range: '" + text + "'");
        }
        CivilDate d{y, mo, da};
        validate_date(d);
        return days_from_civil(d) * kMinutesPerDay + hh * 60 + mm;
    }
    if (n == 3) {
        CivilDate d{y, mo, da};
        validate_date(d);
        return days_from_civil(d) * kMinutesPerDay;
    }
    throw std::invalid_argument("unparseable timestamp: '" + text + "'");
}

std::string format_timestamp(Minute m) {
    const CivilDate d = date_of(m);
    const int mod = minute_of_day(m);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d", d.year, d.month, d.day, mod / 60,
                  mod % 60);
    return buf;
}

std::string format_date(const CivilDate& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

}  // namespace sgame
