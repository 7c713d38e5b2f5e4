#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace bss {

// All timestamps are city-local civil time. No timezone conversion happens
// anywhere in the analysis; the IANA zone name in a city schema is
// provenance metadata only.

struct CivilDate {
  int year = 1970;
  unsigned month = 1;  // 1..12
  unsigned day = 1;    // 1..31

  auto operator<=>(const CivilDate&) const = default;
};

// Minutes since 1970-01-01T00:00 (civil). Total order doubles as event order.
using CivilMinute = std::int64_t;

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(const CivilDate& d);
CivilDate civil_from_days(std::int64_t z);

// 0 = Monday .. 6 = Sunday.
int day_of_week_from_days(std::int64_t days);

CivilMinute make_minute(const CivilDate& d, unsigned hour, unsigned minute);
CivilDate date_of(CivilMinute m);
int minute_of_day(CivilMinute m);  // 0..1439
int day_of_week(CivilMinute m);

bool is_weekend(CivilMinute m);

// Parse with a strptime-style format (e.g. "%Y-%m-%d %H:%M:%S").
// Trailing fractional seconds and timezone suffixes are ignored.
// Seconds, when present, are truncated.
CivilMinute parse_minute(std::string_view text, const std::string& format);

// "YYYY-MM-DD"
CivilDate parse_date(std::string_view text);

// ISO-8601, minute precision: "YYYY-MM-DDTHH:MM".
std::string format_minute(CivilMinute m);
std::string format_date(const CivilDate& d);

}  // namespace bss
