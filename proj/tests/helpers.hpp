// Shared test fixtures: scratch directories, synthetic city data, and the
// exhaustive partition enumerator used as the community-detection oracle.
#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace testutil {

namespace fs = std::filesystem;

class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    path_ = fs::temp_directory_path() /
            ("bss_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

private:
  fs::path path_;
};

inline void write_file(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p);
  out << content;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline const char* kTripSchemaJson = R"({
  "id": "synthetic",
  "timezone": "America/New_York",
  "time_format": "%Y-%m-%d %H:%M:%S",
  "columns": {
    "trip_id": "ride_id",
    "start_station": "start_station_id",
    "start_time": "started_at",
    "end_station": "end_station_id",
    "end_time": "ended_at"
  }
})";

// Deterministic 30-day trip CSV for one synthetic city starting on
// Monday 2023-10-02. Weekdays are bimodal (08:00 / 18:00 commute peaks),
// weekends flat midday; station popularity is zipf-like with a mild
// weekday/weekend permutation so the rank analyses have structure.
inline void make_synthetic_city(const fs::path& dir, const std::string& id,
                                unsigned seed, int n_stations = 40,
                                int weekday_trips = 320,
                                int weekend_trips = 160) {
  std::mt19937 rng(seed);

  std::vector<double> hour_weekday(24, 0.2), hour_weekend(24, 0.2);
  for (int h = 7; h <= 9; ++h) hour_weekday[h] += 4.0;
  for (int h = 17; h <= 19; ++h) hour_weekday[h] += 5.0;
  for (int h = 10; h <= 19; ++h) hour_weekend[h] += 1.5;
  std::discrete_distribution<int> wd_hour(hour_weekday.begin(), hour_weekday.end());
  std::discrete_distribution<int> we_hour(hour_weekend.begin(), hour_weekend.end());

  std::vector<double> pop_wd(n_stations), pop_we(n_stations);
  for (int i = 0; i < n_stations; ++i) {
    pop_wd[i] = 1.0 / std::pow(i + 1.0, 1.0);
  }
  // weekend popularity: same law over a locally shuffled station order
  std::vector<int> perm(n_stations);
  for (int i = 0; i < n_stations; ++i) perm[i] = i;
  for (int i = 0; i + 1 < n_stations; i += 2) std::swap(perm[i], perm[i + 1]);
  for (int i = 0; i < n_stations; ++i) pop_we[perm[i]] = pop_wd[i];
  std::discrete_distribution<int> wd_station(pop_wd.begin(), pop_wd.end());
  std::discrete_distribution<int> we_station(pop_we.begin(), pop_we.end());

  std::uniform_int_distribution<int> minute(0, 59);
  std::uniform_int_distribution<int> duration(4, 28);

  std::string out = "ride_id,started_at,start_station_id,ended_at,end_station_id\n";
  long trip_no = 0;
  for (int day = 0; day < 30; ++day) {
    const int dom = 2 + day;  // 2023-10-02 .. 2023-10-31
    const bool weekend = (day % 7) >= 5;  // day 0 is a Monday
    const int n_trips = weekend ? weekend_trips : weekday_trips;
    auto& hour_dist = weekend ? we_hour : wd_hour;
    auto& station_dist = weekend ? we_station : wd_station;
    for (int t = 0; t < n_trips; ++t) {
      char start_buf[32], end_buf[32];
      const int h = hour_dist(rng);
      const int m = minute(rng);
      int total = h * 60 + m + duration(rng);
      if (total > 1439) total = 1439;  // keep the trip inside the day
      std::snprintf(start_buf, sizeof start_buf, "2023-10-%02d %02d:%02d:00",
                    dom, h, m);
      std::snprintf(end_buf, sizeof end_buf, "2023-10-%02d %02d:%02d:00", dom,
                    total / 60, total % 60);
      out += id + "-" + std::to_string(trip_no++) + "," + start_buf + ",S" +
             std::to_string(station_dist(rng)) + "," + end_buf + ",S" +
             std::to_string(station_dist(rng)) + "\n";
    }
  }
  write_file(dir / id / "trips.csv", out);
  write_file(dir / id / "schema.json", kTripSchemaJson);
}

// Six-city pipeline config over synthetic fixtures.
inline std::string make_six_city_fixture(const fs::path& dir,
                                         const std::string& out_dir,
                                         unsigned long seed = 42) {
  const std::vector<std::string> ids = {"NY",  "London", "Tokyo",
                                        "BOS", "CHI",    "DC"};
  std::string cities;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    make_synthetic_city(dir, ids[i], 1000 + static_cast<unsigned>(i) * 17);
    if (!cities.empty()) cities += ",\n";
    cities += "    {\"id\": \"" + ids[i] + "\", \"timezone\": \"UTC\", " +
              "\"schema\": \"" + (dir / ids[i] / "schema.json").string() +
              "\", \"inputs\": \"" + (dir / ids[i] / "trips.csv").string() +
              "\", \"period\": [\"2023-10-02\", \"2023-10-31\"]}";
  }
  const std::string config = "{\n  \"cities\": [\n" + cities +
                             "\n  ],\n"
                             "  \"bin_width\": 60,\n"
                             "  \"direction\": \"rental\",\n"
                             "  \"top_k_edges\": 50,\n"
                             "  \"seed\": " + std::to_string(seed) + ",\n"
                             "  \"output_dir\": \"" + out_dir + "\"\n}";
  const fs::path config_path = dir / "config.json";
  write_file(config_path, config);
  return config_path.string();
}

// Calls fn once per set partition of {0..n-1}, encoded as block ids.
inline void for_each_partition(int n, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> assign(n, 0);
  std::function<void(int, int)> rec = [&](int i, int max_used) {
    if (i == n) {
      fn(assign);
      return;
    }
    for (int b = 0; b <= max_used + 1; ++b) {
      assign[i] = b;
      rec(i + 1, std::max(max_used, b));
    }
  };
  if (n > 0) rec(1, 0);  // node 0 is always in block 0
}

}  // namespace testutil
