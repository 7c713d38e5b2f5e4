#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bss/civil_time.hpp"

namespace bss {

using StationId = std::string;

struct LatLon {
  double lat = 0;
  double lon = 0;
};

struct TripRecord {
  std::string trip_id;
  StationId start_station;
  CivilMinute start_time = 0;
  StationId end_station;
  CivilMinute end_time = 0;
  std::optional<LatLon> start_coord;
  std::optional<LatLon> end_coord;
};

struct StationSnapshot {
  StationId station_id;
  CivilMinute observed_at = 0;
  std::int64_t bikes_available = 0;
};

// Canonical per-station per-minute activity. Zero-activity minutes are
// never materialized; rentals + returns >= 1 always holds.
struct UsageEvent {
  StationId station_id;
  CivilMinute minute = 0;
  std::int64_t rentals = 0;
  std::int64_t returns = 0;

  bool operator==(const UsageEvent&) const = default;
};

enum class DayClass { weekday, weekend };

// Inclusive date range plus the Mon-Fri / Sat-Sun rule. Public holidays
// are not reclassified.
struct Calendar {
  CivilDate start;
  CivilDate end;

  bool contains(const CivilDate& d) const { return start <= d && d <= end; }
  static DayClass classify(CivilMinute m) {
    return is_weekend(m) ? DayClass::weekend : DayClass::weekday;
  }
};

struct DatasetSummary {
  std::string city;
  CivilDate period_start;
  CivilDate period_end;
  std::int64_t weekday_total = 0;  // rentals + returns
  std::int64_t weekend_total = 0;
  std::int64_t weekday_stations = 0;
  std::int64_t weekend_stations = 0;
};

// Column-name mapping + timestamp format for one city's trip files.
// Loaded from JSON; schemas are data, not code.
struct TripSchema {
  std::string id;
  std::string timezone;  // IANA name, provenance only
  std::string time_format = "%Y-%m-%d %H:%M:%S";
  std::string col_trip_id;
  std::string col_start_station;
  std::string col_start_time;
  std::string col_end_station;
  std::string col_end_time;
  // optional coordinate columns, empty when absent
  std::string col_start_lat, col_start_lon, col_end_lat, col_end_lon;
};

TripSchema load_trip_schema(const std::string& path);
TripSchema parse_trip_schema_json(const std::string& json_text);

struct MalformedRow {
  long line = 0;
  std::string reason;
};

struct ParseReport {
  std::int64_t rows_total = 0;
  std::int64_t rows_ok = 0;
  std::vector<MalformedRow> malformed;  // capped at 100 diagnostics
  std::int64_t malformed_count = 0;
};

// Malformed rows are counted and reported. When their fraction exceeds
// `malformed_threshold` the whole file is rejected with row diagnostics.
std::vector<TripRecord> parse_trip_file(const std::string& path,
                                        const TripSchema& schema,
                                        ParseReport& report,
                                        double malformed_threshold = 0.01);

std::vector<StationSnapshot> parse_snapshot_file(const std::string& path,
                                                 ParseReport& report,
                                                 double malformed_threshold = 0.01);

// Each trip contributes +1 rental at the start and +1 return at the end.
// Output is aggregated and sorted by (minute, station_id).
std::vector<UsageEvent> trips_to_events(const std::vector<TripRecord>& trips);

struct GapReport {
  std::int64_t gaps = 0;          // consecutive pairs further apart than max_gap
  std::int64_t pairs_used = 0;
};

// Signed availability deltas between consecutive snapshots become rentals
// (decrease) or returns (increase). Pairs further apart than max_gap emit
// nothing; they are counted, never interpolated.
std::vector<UsageEvent> snapshots_to_events(
    const std::vector<StationSnapshot>& snapshots, int max_gap_minutes,
    GapReport& report);

DatasetSummary summarize(const std::vector<UsageEvent>& events,
                         const std::string& city, const Calendar& calendar);

std::vector<UsageEvent> filter_period(const std::vector<UsageEvent>& events,
                                      const Calendar& calendar);

// Canonical event CSV: station_id,minute,rentals,returns.
void write_events_csv(const std::vector<UsageEvent>& events,
                      const std::string& path);
std::vector<UsageEvent> read_events_csv(const std::string& path);

std::string summary_to_json(const DatasetSummary& s);

}  // namespace bss
