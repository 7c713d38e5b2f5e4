#include "bss/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bss/csv.hpp"
#include "bss/error.hpp"
#include "json.hpp"

namespace bss {

namespace {

using nlohmann::json;

double parse_double(const std::string& s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{}) throw Error(ErrorCode::parse, "bad number '" + s + "'");
  return v;
}

std::int64_t parse_int(const std::string& s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw Error(ErrorCode::parse, "bad integer '" + s + "'");
  }
  return v;
}

void note_malformed(ParseReport& report, long line, std::string reason) {
  ++report.malformed_count;
  if (report.malformed.size() < 100) {
    report.malformed.push_back({line, std::move(reason)});
  }
}

void check_threshold(const std::string& path, const ParseReport& report,
                     double threshold) {
  if (report.rows_total == 0) return;
  const double frac =
      static_cast<double>(report.malformed_count) / report.rows_total;
  if (frac > threshold) {
    std::ostringstream msg;
    msg << path << ": " << report.malformed_count << " of "
        << report.rows_total << " rows malformed (threshold "
        << threshold * 100 << "%)";
    for (const auto& m : report.malformed) {
      msg << "\n  line " << m.line << ": " << m.reason;
    }
    throw Error(ErrorCode::parse, msg.str());
  }
}

}  // namespace

TripSchema parse_trip_schema_json(const std::string& json_text) {
  json j = json::parse(json_text);
  TripSchema s;
  s.id = j.at("id").get<std::string>();
  s.timezone = j.value("timezone", "");
  s.time_format = j.value("time_format", "%Y-%m-%d %H:%M:%S");
  const auto& cols = j.at("columns");
  s.col_trip_id = cols.at("trip_id").get<std::string>();
  s.col_start_station = cols.at("start_station").get<std::string>();
  s.col_start_time = cols.at("start_time").get<std::string>();
  s.col_end_station = cols.at("end_station").get<std::string>();
  s.col_end_time = cols.at("end_time").get<std::string>();
  s.col_start_lat = cols.value("start_lat", "");
  s.col_start_lon = cols.value("start_lon", "");
  s.col_end_lat = cols.value("end_lat", "");
  s.col_end_lon = cols.value("end_lon", "");
  return s;
}

TripSchema load_trip_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open schema " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_trip_schema_json(buf.str());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, "schema " + path + ": " + e.what());
  }
}

std::vector<TripRecord> parse_trip_file(const std::string& path,
                                        const TripSchema& schema,
                                        ParseReport& report,
                                        double malformed_threshold) {
  csv::Reader reader(path);
  const int c_id = reader.column(schema.col_trip_id);
  const int c_ss = reader.column(schema.col_start_station);
  const int c_st = reader.column(schema.col_start_time);
  const int c_es = reader.column(schema.col_end_station);
  const int c_et = reader.column(schema.col_end_time);
  if (c_id < 0 || c_ss < 0 || c_st < 0 || c_es < 0 || c_et < 0) {
    throw Error(ErrorCode::invalid_argument,
                path + ": header does not match schema '" + schema.id + "'");
  }
  const int c_slat = schema.col_start_lat.empty() ? -1 : reader.column(schema.col_start_lat);
  const int c_slon = schema.col_start_lon.empty() ? -1 : reader.column(schema.col_start_lon);
  const int c_elat = schema.col_end_lat.empty() ? -1 : reader.column(schema.col_end_lat);
  const int c_elon = schema.col_end_lon.empty() ? -1 : reader.column(schema.col_end_lon);

  const int max_col = std::max({c_id, c_ss, c_st, c_es, c_et});
  std::vector<TripRecord> trips;
  std::vector<std::string> row;
  while (reader.next(row)) {
    ++report.rows_total;
    if (static_cast<int>(row.size()) <= max_col) {
      note_malformed(report, reader.line_number(), "too few fields");
      continue;
    }
    try {
      TripRecord t;
      t.trip_id = row[c_id];
      t.start_station = row[c_ss];
      t.end_station = row[c_es];
      if (t.start_station.empty() || t.end_station.empty()) {
        throw Error(ErrorCode::parse, "empty station id");
      }
      t.start_time = parse_minute(row[c_st], schema.time_format);
      t.end_time = parse_minute(row[c_et], schema.time_format);
      if (t.end_time < t.start_time) {
        throw Error(ErrorCode::parse, "end_time before start_time");
      }
      auto coord = [&](int clat, int clon) -> std::optional<LatLon> {
        if (clat < 0 || clon < 0) return std::nullopt;
        if (static_cast<int>(row.size()) <= std::max(clat, clon)) return std::nullopt;
        if (row[clat].empty() || row[clon].empty()) return std::nullopt;
        LatLon ll{parse_double(row[clat]), parse_double(row[clon])};
        if (ll.lat < -90 || ll.lat > 90 || ll.lon < -180 || ll.lon > 180) {
          throw Error(ErrorCode::parse, "coordinate out of range");
        }
        return ll;
      };
      t.start_coord = coord(c_slat, c_slon);
      t.end_coord = coord(c_elat, c_elon);
      trips.push_back(std::move(t));
      ++report.rows_ok;
    } catch (const Error& e) {
      note_malformed(report, reader.line_number(), e.what());
    }
  }
  check_threshold(path, report, malformed_threshold);
  return trips;
}

std::vector<StationSnapshot> parse_snapshot_file(const std::string& path,
                                                 ParseReport& report,
                                                 double malformed_threshold) {
  csv::Reader reader(path);
  const int c_sid = reader.column("station_id");
  const int c_at = reader.column("observed_at");
  const int c_n = reader.column("bikes_available");
  if (c_sid < 0 || c_at < 0 || c_n < 0) {
    throw Error(ErrorCode::invalid_argument,
                path + ": expected columns station_id,observed_at,bikes_available");
  }
  std::vector<StationSnapshot> snaps;
  std::vector<std::string> row;
  while (reader.next(row)) {
    ++report.rows_total;
    try {
      if (static_cast<int>(row.size()) <= std::max({c_sid, c_at, c_n})) {
        throw Error(ErrorCode::parse, "too few fields");
      }
      StationSnapshot s;
      s.station_id = row[c_sid];
      if (s.station_id.empty()) throw Error(ErrorCode::parse, "empty station id");
      s.observed_at = parse_minute(row[c_at], "%Y-%m-%dT%H:%M");
      s.bikes_available = parse_int(row[c_n]);
      if (s.bikes_available < 0) throw Error(ErrorCode::parse, "negative count");
      snaps.push_back(std::move(s));
      ++report.rows_ok;
    } catch (const Error& e) {
      note_malformed(report, reader.line_number(), e.what());
    }
  }
  check_threshold(path, report, malformed_threshold);
  return snaps;
}

namespace {

std::vector<UsageEvent> finalize_events(
    std::map<std::pair<CivilMinute, StationId>, std::pair<std::int64_t, std::int64_t>>&& acc) {
  std::vector<UsageEvent> events;
  events.reserve(acc.size());
  for (auto& [key, counts] : acc) {
    events.push_back(UsageEvent{key.second, key.first, counts.first, counts.second});
  }
  return events;  // map order is already (minute, station_id)
}

}  // namespace

std::vector<UsageEvent> trips_to_events(const std::vector<TripRecord>& trips) {
  std::map<std::pair<CivilMinute, StationId>, std::pair<std::int64_t, std::int64_t>> acc;
  for (const auto& t : trips) {
    acc[{t.start_time, t.start_station}].first += 1;
    acc[{t.end_time, t.end_station}].second += 1;
  }
  return finalize_events(std::move(acc));
}

std::vector<UsageEvent> snapshots_to_events(
    const std::vector<StationSnapshot>& snapshots, int max_gap_minutes,
    GapReport& report) {
  // group per station, keep first observation per minute
  std::map<StationId, std::vector<StationSnapshot>> per_station;
  for (const auto& s : snapshots) per_station[s.station_id].push_back(s);

  std::map<std::pair<CivilMinute, StationId>, std::pair<std::int64_t, std::int64_t>> acc;
  for (auto& [sid, series] : per_station) {
    for (std::size_t i = 1; i < series.size(); ++i) {
      if (series[i].observed_at < series[i - 1].observed_at) {
        throw Error(ErrorCode::invalid_argument,
                    "snapshots for station " + sid + " not sorted by time");
      }
    }
    // deduplicate identical minutes (keep first)
    series.erase(std::unique(series.begin(), series.end(),
                             [](const auto& a, const auto& b) {
                               return a.observed_at == b.observed_at;
                             }),
                 series.end());
    for (std::size_t i = 1; i < series.size(); ++i) {
      const auto& prev = series[i - 1];
      const auto& cur = series[i];
      if (cur.observed_at - prev.observed_at > max_gap_minutes) {
        ++report.gaps;
        continue;
      }
      ++report.pairs_used;
      const std::int64_t delta = cur.bikes_available - prev.bikes_available;
      if (delta < 0) {
        acc[{cur.observed_at, sid}].first += -delta;
      } else if (delta > 0) {
        acc[{cur.observed_at, sid}].second += delta;
      }
    }
  }
  return finalize_events(std::move(acc));
}

DatasetSummary summarize(const std::vector<UsageEvent>& events,
                         const std::string& city, const Calendar& calendar) {
  DatasetSummary s;
  s.city = city;
  s.period_start = calendar.start;
  s.period_end = calendar.end;
  std::set<StationId> weekday_stations, weekend_stations;
  for (const auto& e : events) {
    const CivilDate d = date_of(e.minute);
    if (!calendar.contains(d)) {
      throw Error(ErrorCode::invalid_argument,
                  "event at " + format_minute(e.minute) +
                      " outside calendar range");
    }
    const std::int64_t n = e.rentals + e.returns;
    if (Calendar::classify(e.minute) == DayClass::weekday) {
      s.weekday_total += n;
      weekday_stations.insert(e.station_id);
    } else {
      s.weekend_total += n;
      weekend_stations.insert(e.station_id);
    }
  }
  s.weekday_stations = static_cast<std::int64_t>(weekday_stations.size());
  s.weekend_stations = static_cast<std::int64_t>(weekend_stations.size());
  return s;
}

std::vector<UsageEvent> filter_period(const std::vector<UsageEvent>& events,
                                      const Calendar& calendar) {
  std::vector<UsageEvent> out;
  out.reserve(events.size());
  for (const auto& e : events) {
    if (calendar.contains(date_of(e.minute))) out.push_back(e);
  }
  return out;
}

void write_events_csv(const std::vector<UsageEvent>& events,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << "station_id,minute,rentals,returns\n";
  for (const auto& e : events) {
    csv::write_row(out, {e.station_id, format_minute(e.minute),
                         std::to_string(e.rentals), std::to_string(e.returns)});
  }
}

std::vector<UsageEvent> read_events_csv(const std::string& path) {
  csv::Reader reader(path);
  const int c_sid = reader.column("station_id");
  const int c_min = reader.column("minute");
  const int c_rent = reader.column("rentals");
  const int c_ret = reader.column("returns");
  if (c_sid < 0 || c_min < 0 || c_rent < 0 || c_ret < 0) {
    throw Error(ErrorCode::parse, path + ": not a canonical event CSV");
  }
  std::vector<UsageEvent> events;
  std::vector<std::string> row;
  while (reader.next(row)) {
    UsageEvent e;
    e.station_id = row[c_sid];
    e.minute = parse_minute(row[c_min], "%Y-%m-%dT%H:%M");
    e.rentals = parse_int(row[c_rent]);
    e.returns = parse_int(row[c_ret]);
    events.push_back(std::move(e));
  }
  return events;
}

std::string summary_to_json(const DatasetSummary& s) {
  json j;
  j["city"] = s.city;
  j["period"] = {format_date(s.period_start), format_date(s.period_end)};
  j["weekday_total"] = s.weekday_total;
  j["weekend_total"] = s.weekend_total;
  j["weekday_stations"] = s.weekday_stations;
  j["weekend_stations"] = s.weekend_stations;
  return j.dump(2);
}

}  // namespace bss
