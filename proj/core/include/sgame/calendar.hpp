#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sgame {

// Minutes since 1970-01-01T00:00 in the (single, configured) game timezone.
using Minute = std::int64_t;

inline constexpr int kMinutesPerDay = 1440;

struct CivilDate {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    friend bool operator==(const CivilDate&, const CivilDate&) = default;
    auto operator<=>(const CivilDate&) const = default;
};

// Days since 1970-01-01 (proleptic Gregorian).
std::int64_t days_from_civil(const CivilDate& d);
CivilDate civil_from_days(std::int64_t days);

inline std::int64_t day_index(Minute m) {
    // floor division (timestamps can predate the epoch in principle)
    return m >= 0 ? m / kMinutesPerDay : -((-m + kMinutesPerDay - 1) / kMinutesPerDay);
}

inline int minute_of_day(Minute m) {
    return static_cast<int>(m - day_index(m) * kMinutesPerDay);
}

inline CivilDate date_of(Minute m) { return civil_from_days(day_index(m)); }
inline Minute start_of_date(const CivilDate& d) { return days_from_civil(d) * kMinutesPerDay; }

// 0 = Monday .. 6 = Sunday.
int weekday_mon0(const CivilDate& d);
inline int weekday_mon0(Minute m) { return weekday_mon0(date_of(m)); }

inline bool is_saturday_or_sunday(const CivilDate& d) { return weekday_mon0(d) >= 5; }

// Weekend = Saturday/Sunday plus any configured holiday.
bool is_weekend_daytype(const CivilDate& d, const std::vector<CivilDate>& holidays);

// Closed date interval [first, last].
struct DateRange {
    CivilDate first;
    CivilDate last;

    bool empty() const { return last < first; }
    bool contains(const CivilDate& d) const { return !(d < first) && !(last < d); }
    bool overlaps(const DateRange& other) const;
};

// Accepts "YYYY-MM-DD[T ]HH:MM[:SS]" (seconds truncated), "YYYY-MM-DD"
// (midnight) or a plain integer (epoch minutes). Throws std::invalid_argument
// on malformed input; ingest wraps that into RowParseError with position info.
Minute parse_timestamp(const std::string& text);
CivilDate parse_date(const std::string& text);

std::string format_timestamp(Minute m);       // YYYY-MM-DDTHH:MM
std::string format_date(const CivilDate& d);  // YYYY-MM-DD

}  // namespace sgame
