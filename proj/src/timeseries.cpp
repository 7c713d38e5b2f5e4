#include "bss/timeseries.hpp"

#include <charconv>
#include <fstream>
#include <map>

#include "bss/csv.hpp"
#include "bss/error.hpp"
#include "bss/num_format.hpp"

namespace bss {

std::string direction_name(Direction d) {
  switch (d) {
    case Direction::rental: return "rental";
    case Direction::ret: return "return";
    case Direction::combined: return "combined";
  }
  return "?";
}

Direction direction_from_name(const std::string& name) {
  if (name == "rental") return Direction::rental;
  if (name == "return") return Direction::ret;
  if (name == "combined") return Direction::combined;
  throw Error(ErrorCode::invalid_argument, "unknown direction '" + name + "'");
}

std::string DaySelector::name() const {
  if (code == -1) return "Weekday";
  if (code == -2) return "Weekend";
  return kDayNames[code];
}

DayDistribution build_distribution(const std::vector<UsageEvent>& events,
                                   const std::string& city, DaySelector day,
                                   Direction direction, int bin_width) {
  if (bin_width <= 0 || 1440 % bin_width != 0) {
    throw Error(ErrorCode::invalid_argument,
                "bin_width " + std::to_string(bin_width) +
                    " does not divide 1440");
  }
  DayDistribution dist;
  dist.city = city;
  dist.day = day.name();
  dist.direction = direction;
  dist.bin_width = bin_width;
  const int n_bins = 1440 / bin_width;
  std::vector<std::int64_t> counts(n_bins, 0);
  for (const auto& e : events) {
    if (!day.matches(day_of_week(e.minute))) continue;
    std::int64_t n = 0;
    switch (direction) {
      case Direction::rental: n = e.rentals; break;
      case Direction::ret: n = e.returns; break;
      case Direction::combined: n = e.rentals + e.returns; break;
    }
    counts[minute_of_day(e.minute) / bin_width] += n;
  }
  std::int64_t total = 0;
  for (auto c : counts) total += c;
  dist.total_count = total;
  dist.probs.assign(n_bins, 0.0);
  if (total > 0) {
    for (int t = 0; t < n_bins; ++t) {
      dist.probs[t] = static_cast<double>(counts[t]) / static_cast<double>(total);
    }
  }
  return dist;
}

std::map<std::pair<int, Direction>, DayDistribution> distribution_set(
    const std::vector<UsageEvent>& events, const std::string& city,
    int bin_width) {
  std::map<std::pair<int, Direction>, DayDistribution> out;
  for (int d = 0; d < 7; ++d) {
    for (Direction dir : {Direction::rental, Direction::ret}) {
      out[{d, dir}] =
          build_distribution(events, city, DaySelector::day(d), dir, bin_width);
    }
  }
  return out;
}

void write_distributions_csv(
    const std::map<std::pair<int, Direction>, DayDistribution>& dists,
    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << "city,day,direction,bin_index,probability,count\n";
  for (const auto& [key, dist] : dists) {
    const int n_bins = static_cast<int>(dist.probs.size());
    for (int t = 0; t < n_bins; ++t) {
      const double count = dist.probs[t] * static_cast<double>(dist.total_count);
      csv::write_row(out, {dist.city, dist.day, direction_name(dist.direction),
                           std::to_string(t), format_double(dist.probs[t]),
                           std::to_string(static_cast<std::int64_t>(count + 0.5))});
    }
  }
}

std::vector<DayDistribution> read_distributions_csv(const std::string& path) {
  csv::Reader reader(path);
  const int c_city = reader.column("city");
  const int c_day = reader.column("day");
  const int c_dir = reader.column("direction");
  const int c_bin = reader.column("bin_index");
  const int c_prob = reader.column("probability");
  const int c_count = reader.column("count");
  if (c_city < 0 || c_day < 0 || c_dir < 0 || c_bin < 0 || c_prob < 0 ||
      c_count < 0) {
    throw Error(ErrorCode::parse, path + ": not a distributions CSV");
  }
  std::map<std::tuple<std::string, std::string, std::string>, DayDistribution>
      by_key;
  std::vector<std::tuple<std::string, std::string, std::string>> order;
  std::vector<std::string> row;
  while (reader.next(row)) {
    auto key = std::make_tuple(row[c_city], row[c_day], row[c_dir]);
    auto it = by_key.find(key);
    if (it == by_key.end()) {
      DayDistribution d;
      d.city = row[c_city];
      d.day = row[c_day];
      d.direction = direction_from_name(row[c_dir]);
      it = by_key.emplace(key, std::move(d)).first;
      order.push_back(key);
    }
    auto& dist = it->second;
    const int bin = static_cast<int>(std::stol(row[c_bin]));
    if (static_cast<int>(dist.probs.size()) <= bin) dist.probs.resize(bin + 1, 0.0);
    dist.probs[bin] = std::stod(row[c_prob]);
    dist.total_count += std::stol(row[c_count]);
  }
  std::vector<DayDistribution> out;
  for (const auto& key : order) {
    auto& d = by_key[key];
    if (d.probs.empty() || 1440 % d.probs.size() != 0) {
      throw Error(ErrorCode::parse, path + ": bad bin count");
    }
    d.bin_width = static_cast<int>(1440 / d.probs.size());
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace bss
