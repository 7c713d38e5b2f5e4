#include "bss/civil_time.hpp"

#include <cstdio>
#include <ctime>
#include <iomanip>
#include <sstream>

#include "bss/error.hpp"

namespace bss {

std::int64_t days_from_civil(const CivilDate& d) {
  // Howard Hinnant's algorithm.
  auto y = static_cast<std::int64_t>(d.year);
  const unsigned m = d.month;
  const unsigned day = d.day;
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + day - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
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
  const unsigned day = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return CivilDate{static_cast<int>(y + (m <= 2)), m, day};
}

int day_of_week_from_days(std::int64_t days) {
  // 1970-01-01 was a Thursday.
  return static_cast<int>(((days + 3) % 7 + 7) % 7);
}

CivilMinute make_minute(const CivilDate& d, unsigned hour, unsigned minute) {
  return days_from_civil(d) * 1440 + hour * 60 + minute;
}

CivilDate date_of(CivilMinute m) {
  std::int64_t days = m / 1440;
  if (m < 0 && m % 1440 != 0) --days;
  return civil_from_days(days);
}

int minute_of_day(CivilMinute m) {
  return static_cast<int>((m % 1440 + 1440) % 1440);
}

int day_of_week(CivilMinute m) {
  std::int64_t days = m / 1440;
  if (m < 0 && m % 1440 != 0) --days;
  return day_of_week_from_days(days);
}

bool is_weekend(CivilMinute m) { return day_of_week(m) >= 5; }

CivilMinute parse_minute(std::string_view text, const std::string& format) {
  std::tm tm{};
  std::istringstream in{std::string(text)};
  in >> std::get_time(&tm, format.c_str());
  if (in.fail()) {
    throw Error(ErrorCode::parse,
                "bad timestamp '" + std::string(text) + "' for format '" +
                    format + "'");
  }
  CivilDate d{tm.tm_year + 1900, static_cast<unsigned>(tm.tm_mon + 1),
              static_cast<unsigned>(tm.tm_mday)};
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31 ||
      tm.tm_hour < 0 || tm.tm_hour > 23 || tm.tm_min < 0 || tm.tm_min > 59) {
    throw Error(ErrorCode::parse,
                "timestamp out of range: '" + std::string(text) + "'");
  }
  return make_minute(d, static_cast<unsigned>(tm.tm_hour),
                     static_cast<unsigned>(tm.tm_min));
}

CivilDate parse_date(std::string_view text) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (std::sscanf(std::string(text).c_str(), "%d-%u-%u", &y, &m, &d) != 3 ||
      m < 1 || m > 12 || d < 1 || d > 31) {
    throw Error(ErrorCode::parse, "bad date '" + std::string(text) + "'");
  }
  return CivilDate{y, m, d};
}

std::string format_minute(CivilMinute m) {
  const CivilDate d = date_of(m);
  const int mod = minute_of_day(m);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d", d.year, d.month,
                d.day, mod / 60, mod % 60);
  return buf;
}

std::string format_date(const CivilDate& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", d.year, d.month, d.day);
  return buf;
}

}  // namespace bss
