#include <algorithm>
#include <random>

#include "bss/error.hpp"
#include "bss/timeseries.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace bss;

namespace {

UsageEvent ev(const std::string& id, const CivilDate& d, int h, int m,
              std::int64_t rentals, std::int64_t returns) {
  return {id, make_minute(d, h, m), rentals, returns};
}

const CivilDate kMon{2023, 10, 2};
const CivilDate kTue{2023, 10, 3};
const CivilDate kSat{2023, 10, 7};

}  // namespace

TEST_CASE("all events in one hour concentrate the distribution") {
  std::vector<UsageEvent> events;
  for (int i = 0; i < 4; ++i) events.push_back(ev("A", kMon, 8, i * 10, 1, 0));
  const auto d = build_distribution(events, "X", DaySelector::day(0),
                                    Direction::rental, 60);
  CHECK(d.probs[8] == doctest::Approx(1.0));
  CHECK(d.total_count == 4);
  for (int t = 0; t < 24; ++t) {
    if (t != 8) CHECK(d.probs[t] == 0.0);
  }
}

TEST_CASE("two-peak split is symmetric") {
  const std::vector<UsageEvent> events{
      ev("A", kMon, 8, 5, 1, 0), ev("B", kMon, 8, 30, 1, 0),
      ev("A", kMon, 18, 0, 1, 0), ev("B", kMon, 18, 59, 1, 0)};
  const auto d = build_distribution(events, "X", DaySelector::day(0),
                                    Direction::rental, 60);
  CHECK(d.probs[8] == doctest::Approx(0.5));
  CHECK(d.probs[18] == doctest::Approx(0.5));
}

TEST_CASE("day filter keeps only matching dates") {
  // 7 events across Mon + Tue; Monday has 3 rentals at hours 7,7,9
  const std::vector<UsageEvent> events{
      ev("A", kMon, 7, 0, 1, 0),  ev("B", kMon, 7, 30, 1, 0),
      ev("A", kMon, 9, 0, 1, 0),  ev("A", kTue, 8, 0, 1, 0),
      ev("B", kTue, 8, 10, 1, 0), ev("C", kTue, 12, 0, 1, 0),
      ev("C", kTue, 13, 0, 1, 0)};
  const auto d = build_distribution(events, "X", DaySelector::day(0),
                                    Direction::rental, 60);
  CHECK(d.total_count == 3);
  CHECK(d.probs[7] == doctest::Approx(2.0 / 3));
  CHECK(d.probs[9] == doctest::Approx(1.0 / 3));
  CHECK(d.probs[8] == 0.0);
}

TEST_CASE("bin width must divide the day") {
  CHECK_THROWS_AS(
      build_distribution({}, "X", DaySelector::day(0), Direction::rental, 7),
      Error);
  CHECK_NOTHROW(
      build_distribution({}, "X", DaySelector::day(0), Direction::rental, 1));
}

TEST_CASE("distribution_set produces 14 ordered slots") {
  const auto empty_set = distribution_set({}, "X", 60);
  CHECK(empty_set.size() == 14);
  for (const auto& [key, d] : empty_set) {
    CHECK(d.total_count == 0);
    CHECK(std::all_of(d.probs.begin(), d.probs.end(),
                      [](double p) { return p == 0.0; }));
  }

  const auto sat_only = distribution_set({ev("A", kSat, 10, 0, 2, 1)}, "X", 60);
  int populated = 0;
  for (const auto& [key, d] : sat_only) {
    if (!d.empty()) {
      ++populated;
      CHECK(d.day == "Sat");
    }
  }
  CHECK(populated == 2);
}

TEST_CASE("bimodal weekday generator peaks at a commute hour") {
  std::mt19937 rng(11);
  std::discrete_distribution<int> hour(
      {1, 0, 0, 0, 0, 1, 2, 6, 9, 4, 2, 2, 2, 2, 2, 2, 3, 7, 9, 5, 2, 1, 1, 1});
  std::vector<UsageEvent> events;
  for (int i = 0; i < 2000; ++i) {
    events.push_back(ev("S", kMon, hour(rng), i % 60, 1, 0));
  }
  const auto d = build_distribution(events, "X", DaySelector::day(0),
                                    Direction::rental, 60);
  const int argmax = static_cast<int>(
      std::max_element(d.probs.begin(), d.probs.end()) - d.probs.begin());
  CHECK((argmax == 8 || argmax == 18));
}

TEST_CASE("normalization and count conservation") {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> hour(0, 23), minute(0, 59), day(2, 29);
  std::vector<UsageEvent> events;
  std::int64_t total_rentals = 0;
  for (int i = 0; i < 300; ++i) {
    const std::int64_t r = 1 + i % 3;
    events.push_back(ev("S" + std::to_string(i % 5),
                        {2023, 10, static_cast<unsigned>(day(rng))}, hour(rng),
                        minute(rng), r, i % 2));
    total_rentals += r;
  }
  const auto set = distribution_set(events, "X", 60);
  std::int64_t seen = 0;
  for (const auto& [key, d] : set) {
    if (key.second != Direction::rental) continue;
    seen += d.total_count;
    if (d.total_count > 0) {
      double sum = 0;
      for (double p : d.probs) sum += p;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  CHECK(seen == total_rentals);

  // permuting input order changes nothing
  auto shuffled = events;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto set2 = distribution_set(shuffled, "X", 60);
  for (const auto& [key, d] : set) {
    CHECK(set2.at(key).probs == d.probs);
    CHECK(set2.at(key).total_count == d.total_count);
  }
}

TEST_CASE("distributions CSV round trip") {
  testutil::TempDir tmp("dist_csv");
  const std::vector<UsageEvent> events{ev("A", kMon, 8, 0, 3, 1),
                                       ev("B", kSat, 14, 0, 2, 2)};
  const auto set = distribution_set(events, "NY", 60);
  const auto path = (tmp.path() / "dist.csv").string();
  write_distributions_csv(set, path);
  const auto back = read_distributions_csv(path);
  CHECK(back.size() == 14);
  for (const auto& d : back) {
    const int day = static_cast<int>(
        std::find(std::begin(kDayNames), std::end(kDayNames), d.day) -
        std::begin(kDayNames));
    const auto& orig = set.at({day, d.direction});
    CHECK(d.total_count == orig.total_count);
    CHECK(d.bin_width == 60);
    for (std::size_t t = 0; t < d.probs.size(); ++t) {
      CHECK(d.probs[t] == orig.probs[t]);  // 17-digit serialization is exact
    }
  }
}
