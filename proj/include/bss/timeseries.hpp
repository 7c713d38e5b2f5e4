#pragma once

#include <map>
#include <string>
#include <vector>

#include "bss/ingest.hpp"

namespace bss {

enum class Direction { rental, ret, combined };

std::string direction_name(Direction d);
Direction direction_from_name(const std::string& name);

// Mon..Sun = 0..6; the two aggregate classes follow.
struct DaySelector {
  // -1 = weekday class, -2 = weekend class, 0..6 = single day
  int code = 0;

  static DaySelector day(int d) { return {d}; }
  static DaySelector weekday() { return {-1}; }
  static DaySelector weekend() { return {-2}; }

  bool matches(int dow) const {
    if (code == -1) return dow < 5;
    if (code == -2) return dow >= 5;
    return dow == code;
  }
  std::string name() const;
};

inline constexpr const char* kDayNames[7] = {"Mon", "Tue", "Wed", "Thu",
                                             "Fri", "Sat", "Sun"};

// Normalized time-of-day usage: probs[t] = N(t) / N_total.
struct DayDistribution {
  std::string city;
  std::string day;        // Mon..Sun, Weekday, Weekend
  Direction direction = Direction::rental;
  int bin_width = 60;     // minutes, divides 1440
  std::vector<double> probs;      // length 1440 / bin_width
  std::int64_t total_count = 0;   // N_total

  bool empty() const { return total_count == 0; }
};

DayDistribution build_distribution(const std::vector<UsageEvent>& events,
                                   const std::string& city, DaySelector day,
                                   Direction direction, int bin_width);

// 7 days x {rental, return}, keyed (day 0..6, direction), ordered Mon..Sun.
std::map<std::pair<int, Direction>, DayDistribution> distribution_set(
    const std::vector<UsageEvent>& events, const std::string& city,
    int bin_width);

// Long format: city,day,direction,bin_index,probability,count.
void write_distributions_csv(
    const std::map<std::pair<int, Direction>, DayDistribution>& dists,
    const std::string& path);
std::vector<DayDistribution> read_distributions_csv(const std::string& path);

}  // namespace bss
