#include "bss/rankmodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>

#include "bss/csv.hpp"
#include "bss/leastsq.hpp"
#include "bss/num_format.hpp"
#include "json.hpp"

namespace bss {

namespace {

void check_model_params(double a, double m_max) {
  if (!(a > 0 && a < 1)) {
    throw Error(ErrorCode::invalid_argument,
                "parameter a must be in (0, 1), got " + std::to_string(a));
  }
  if (m_max < 1) {
    throw Error(ErrorCode::invalid_argument, "m_max must be >= 1");
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

RankCorrespondence rank_correspondence(const RankDistribution& weekday,
                                       const RankDistribution& weekend) {
  if (weekday.entries.empty() || weekend.entries.empty()) {
    throw Error(ErrorCode::invalid_argument, "empty rank distribution");
  }
  std::map<StationId, std::int64_t> weekend_rank;
  for (const auto& e : weekend.entries) weekend_rank[e.station_id] = e.rank;

  // intersect, then densely re-rank both sides preserving original order
  std::vector<std::pair<std::int64_t, const RankEntry*>> common;  // (weekend orig rank, wd entry)
  for (const auto& e : weekday.entries) {
    auto it = weekend_rank.find(e.station_id);
    if (it != weekend_rank.end()) common.emplace_back(it->second, &e);
  }
  if (common.empty()) {
    throw Error(ErrorCode::invalid_argument,
                "weekday and weekend station sets are disjoint");
  }
  std::vector<std::int64_t> weekend_orig;
  for (const auto& [wr, _] : common) weekend_orig.push_back(wr);
  std::sort(weekend_orig.begin(), weekend_orig.end());
  std::map<std::int64_t, std::int64_t> weekend_dense;
  for (std::size_t i = 0; i < weekend_orig.size(); ++i) {
    weekend_dense[weekend_orig[i]] = static_cast<std::int64_t>(i + 1);
  }

  RankCorrespondence corr;
  for (std::size_t i = 0; i < common.size(); ++i) {
    corr.pairs.push_back({common[i].second->station_id,
                          static_cast<std::int64_t>(i + 1),
                          weekend_dense[common[i].first]});
  }
  corr.n_weekday = static_cast<std::int64_t>(common.size());
  corr.m_max = static_cast<std::int64_t>(common.size());
  return corr;
}

double model_closed_form(double x, double a, double b, double m_max) {
  check_model_params(a, m_max);
  const double asym = m_max / a;
  return (b - asym) * std::pow(1.0 - a / m_max, x) + asym;
}

std::vector<double> recurrence_iterate(double s1, double a, double m_max,
                                       std::size_t steps) {
  check_model_params(a, m_max);
  std::vector<double> s;
  s.reserve(steps);
  if (steps == 0) return s;
  s.push_back(s1);
  for (std::size_t k = 2; k <= steps; ++k) {
    const double prev = s.back();
    s.push_back(prev + (m_max - a * prev) / m_max);
  }
  return s;
}

RankModelFit fit_rank_model(const RankCorrespondence& corr,
                            std::optional<std::pair<double, double>> init) {
  if (corr.pairs.size() < 10) {
    throw Error(ErrorCode::invalid_argument,
                "need at least 10 common stations, have " +
                    std::to_string(corr.pairs.size()));
  }
  const double m_max = static_cast<double>(corr.m_max);
  const int m = static_cast<int>(corr.pairs.size());

  std::vector<double> xs(m), ys(m);
  for (int i = 0; i < m; ++i) {
    xs[i] = static_cast<double>(corr.pairs[i].weekday_rank - 1);
    ys[i] = static_cast<double>(corr.pairs[i].weekend_rank);
  }

  auto fn = [&](const std::vector<double>& p, std::vector<double>& r,
                std::vector<double>& jac) {
    const double a = p[0], b = p[1];
    const double u = 1.0 - a / m_max;
    const double asym = m_max / a;
    for (int i = 0; i < m; ++i) {
      const double ux = std::pow(u, xs[i]);
      r[i] = (b - asym) * ux + asym - ys[i];
      jac[i * 2 + 1] = ux;  // d/db
      const double uxm1 = xs[i] > 0 ? std::pow(u, xs[i] - 1.0) : 0.0;
      jac[i * 2 + 0] = (m_max / (a * a)) * (ux - 1.0) -
                       (b - asym) * (xs[i] / m_max) * uxm1;  // d/da
    }
  };
  const double a0 = init ? init->first : 0.5;
  const double b0 = init ? init->second : std::max(ys.front(), 1.0);
  LmOptions opts;
  opts.lower = {0.01, 1.0};
  opts.upper = {0.99, std::numeric_limits<double>::infinity()};
  auto lm = levenberg_marquardt({a0, b0}, m, fn, opts);

  RankModelFit fit;
  fit.a = lm.params[0];
  fit.b = lm.params[1];
  fit.m_max = corr.m_max;
  fit.rmse = lm.rmse;
  // curvature over the observed x range; a flat decay means the model is
  // indistinguishable from y = x + const
  const double curvature = 1.0 - std::pow(1.0 - fit.a / m_max, xs.back());
  fit.near_linear = curvature < 0.05;
  if (!lm.converged) {
    throw Error(ErrorCode::no_convergence,
                "rank model fit did not converge (best a=" +
                    std::to_string(fit.a) + " b=" + std::to_string(fit.b) + ")");
  }
  return fit;
}

SimulationResult simulate_assignment(std::size_t steps, double m_max, double a,
                                     double s1, std::uint64_t seed,
                                     std::size_t trials) {
  check_model_params(a, m_max);
  if (s1 < 1 || steps == 0 || trials == 0) {
    throw Error(ErrorCode::invalid_argument, "bad simulation parameters");
  }
  std::vector<double> sum(steps, 0.0), sumsq(steps, 0.0);
  for (std::size_t t = 0; t < trials; ++t) {
    std::mt19937_64 rng(splitmix64(seed + 0x1000 * t));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double s = s1;
    for (std::size_t k = 0; k < steps; ++k) {
      sum[k] += s;
      sumsq[k] += s * s;
      const double p = std::clamp((m_max - a * s) / m_max, 0.0, 1.0);
      if (unif(rng) < p) s += 1.0;
    }
  }
  SimulationResult out;
  out.mean.resize(steps);
  out.stderr_.resize(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double mean = sum[k] / trials;
    out.mean[k] = mean;
    if (trials > 1) {
      double var = (sumsq[k] - trials * mean * mean) / (trials - 1.0);
      if (var < 0) var = 0;
      out.stderr_[k] = std::sqrt(var / trials);
    }
  }
  return out;
}

void write_correspondence_csv(const RankCorrespondence& corr,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << "station_id,weekday_rank,weekend_rank\n";
  for (const auto& p : corr.pairs) {
    csv::write_row(out, {p.station_id, std::to_string(p.weekday_rank),
                         std::to_string(p.weekend_rank)});
  }
}

RankCorrespondence read_correspondence_csv(const std::string& path) {
  csv::Reader reader(path);
  const int c_sid = reader.column("station_id");
  const int c_x = reader.column("weekday_rank");
  const int c_y = reader.column("weekend_rank");
  if (c_sid < 0 || c_x < 0 || c_y < 0) {
    throw Error(ErrorCode::parse, path + ": not a correspondence CSV");
  }
  RankCorrespondence corr;
  std::vector<std::string> row;
  while (reader.next(row)) {
    corr.pairs.push_back({row[c_sid], std::stol(row[c_x]), std::stol(row[c_y])});
    corr.n_weekday = std::max(corr.n_weekday, corr.pairs.back().weekday_rank);
    corr.m_max = std::max(corr.m_max, corr.pairs.back().weekend_rank);
  }
  std::sort(corr.pairs.begin(), corr.pairs.end(),
            [](const auto& a, const auto& b) {
              return a.weekday_rank < b.weekday_rank;
            });
  return corr;
}

std::string rank_model_to_json(const RankModelFit& fit) {
  nlohmann::json j;
  j["a"] = fit.a;
  j["b"] = fit.b;
  j["m_max"] = fit.m_max;
  j["rmse"] = fit.rmse;
  j["near_linear"] = fit.near_linear;
  return j.dump(2);
}

RankModelFit rank_model_from_json(const std::string& json_text) {
  auto j = nlohmann::json::parse(json_text);
  RankModelFit fit;
  fit.a = j.at("a").get<double>();
  fit.b = j.at("b").get<double>();
  fit.m_max = j.at("m_max").get<std::int64_t>();
  fit.rmse = j.value("rmse", 0.0);
  fit.near_linear = j.value("near_linear", false);
  return fit;
}

void write_simulation_csv(const SimulationResult& sim, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << "k,mean,stderr\n";
  for (std::size_t k = 0; k < sim.mean.size(); ++k) {
    csv::write_row(out, {std::to_string(k + 1), format_double(sim.mean[k]),
                         format_double(sim.stderr_[k])});
  }
}

}  // namespace bss
