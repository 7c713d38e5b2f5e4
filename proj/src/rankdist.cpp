#include "bss/rankdist.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "bss/csv.hpp"
#include "bss/leastsq.hpp"
#include "bss/num_format.hpp"
#include "json.hpp"

namespace bss {

std::string day_class_name(DayClass c) {
  return c == DayClass::weekday ? "weekday" : "weekend";
}

DayClass day_class_from_name(const std::string& name) {
  if (name == "weekday") return DayClass::weekday;
  if (name == "weekend") return DayClass::weekend;
  throw Error(ErrorCode::invalid_argument, "unknown day class '" + name + "'");
}

RankDistribution rank_stations(const std::vector<UsageEvent>& events,
                               DayClass day_class) {
  std::map<StationId, std::int64_t> counts;
  for (const auto& e : events) {
    if (Calendar::classify(e.minute) != day_class) continue;
    counts[e.station_id] += e.rentals + e.returns;
  }
  if (counts.empty()) {
    throw Error(ErrorCode::invalid_argument,
                "no events in day class " + day_class_name(day_class));
  }
  RankDistribution dist;
  dist.day_class = day_class;
  std::int64_t total = 0;
  for (const auto& [id, n] : counts) {
    dist.entries.push_back({0, id, n, 0});
    total += n;
  }
  std::sort(dist.entries.begin(), dist.entries.end(),
            [](const RankEntry& a, const RankEntry& b) {
              if (a.count != b.count) return a.count > b.count;
              return a.station_id < b.station_id;
            });
  for (std::size_t i = 0; i < dist.entries.size(); ++i) {
    dist.entries[i].rank = static_cast<std::int64_t>(i + 1);
    dist.entries[i].proportion =
        static_cast<double>(dist.entries[i].count) / static_cast<double>(total);
  }
  return dist;
}

double evaluate_rank_model(const RankFit& fit, double k) {
  return fit.norm_const * std::pow(k, -fit.alpha) *
         std::exp(-fit.beta * std::pow(k, fit.gamma));
}

namespace {

// log model(k) = c - alpha * ln k - beta * k^gamma, params (c, alpha, beta, gamma)
void rank_residuals(const std::vector<double>& log_p,
                    const std::vector<double>& ks,
                    const std::vector<double>& params,
                    std::vector<double>& r, std::vector<double>& jac) {
  const double c = params[0], alpha = params[1], beta = params[2],
               gamma = params[3];
  const int m = static_cast<int>(ks.size());
  for (int i = 0; i < m; ++i) {
    const double lnk = std::log(ks[i]);
    const double kg = std::pow(ks[i], gamma);
    r[i] = (c - alpha * lnk - beta * kg) - log_p[i];
    jac[i * 4 + 0] = 1.0;
    jac[i * 4 + 1] = -lnk;
    jac[i * 4 + 2] = -kg;
    jac[i * 4 + 3] = -beta * kg * lnk;
  }
}

}  // namespace

RankFit fit_rank_distribution(const RankDistribution& dist,
                              std::optional<RankFitInit> init) {
  std::vector<double> ks, log_p;
  std::int64_t zero_ranks = 0;
  for (const auto& e : dist.entries) {
    if (e.proportion <= 0) {
      ++zero_ranks;
      continue;
    }
    ks.push_back(static_cast<double>(e.rank));
    log_p.push_back(std::log(e.proportion));
  }
  if (ks.size() < 10) {
    throw Error(ErrorCode::invalid_argument,
                "need at least 10 positive-proportion ranks, have " +
                    std::to_string(ks.size()));
  }

  double alpha0, beta0, gamma0;
  if (init) {
    alpha0 = init->alpha;
    beta0 = init->beta;
    gamma0 = init->gamma;
  } else {
    // slope of the top 10% of ranks in log-log gives alpha0
    const std::size_t head = std::max<std::size_t>(ks.size() / 10, 3);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < head; ++i) {
      const double x = std::log(ks[i]);
      sx += x;
      sy += log_p[i];
      sxx += x * x;
      sxy += x * log_p[i];
    }
    const double denom = head * sxx - sx * sx;
    alpha0 = denom > 0 ? -(head * sxy - sx * sy) / denom : 0.5;
    gamma0 = 2.0;
    // beta0: cutoff halves the model at k = N/2
    const double half_k = std::max(ks.back() / 2.0, 2.0);
    beta0 = std::log(2.0) / std::pow(half_k, gamma0);
  }
  const double c0 = log_p.front() + alpha0 * std::log(ks.front()) +
                    beta0 * std::pow(ks.front(), gamma0);

  auto fn = [&](const std::vector<double>& p, std::vector<double>& r,
                std::vector<double>& j) { rank_residuals(log_p, ks, p, r, j); };

  LmOptions opts;
  const double inf = std::numeric_limits<double>::infinity();
  opts.lower = {-inf, 0.0, 0.0, 0.1};  // c, alpha, beta, gamma
  opts.upper = {inf, 5.0, 1.0, 5.0};
  auto lm = levenberg_marquardt({c0, alpha0, beta0, gamma0},
                                static_cast<int>(ks.size()), fn, opts);

  RankFit fit;
  fit.norm_const = std::exp(lm.params[0]);
  fit.alpha = lm.params[1];
  fit.beta = lm.params[2];
  fit.gamma = lm.params[3];
  fit.rmse_log = lm.rmse;
  fit.n_ranks = static_cast<std::int64_t>(ks.size());
  if (!lm.converged) {
    throw FitError("rank distribution fit did not converge in " +
                       std::to_string(lm.iterations) + " iterations" +
                       (zero_ranks ? " (" + std::to_string(zero_ranks) +
                                         " zero-proportion ranks excluded)"
                                   : ""),
                   fit);
  }
  return fit;
}

void write_rank_csv(const RankDistribution& dist, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << "rank,station_id,count,proportion,day_class\n";
  for (const auto& e : dist.entries) {
    csv::write_row(out, {std::to_string(e.rank), e.station_id,
                         std::to_string(e.count), format_double(e.proportion),
                         day_class_name(dist.day_class)});
  }
}

RankDistribution read_rank_csv(const std::string& path) {
  csv::Reader reader(path);
  const int c_rank = reader.column("rank");
  const int c_sid = reader.column("station_id");
  const int c_count = reader.column("count");
  const int c_prop = reader.column("proportion");
  const int c_class = reader.column("day_class");
  if (c_rank < 0 || c_sid < 0 || c_count < 0 || c_prop < 0 || c_class < 0) {
    throw Error(ErrorCode::parse, path + ": not a rank CSV");
  }
  RankDistribution dist;
  std::vector<std::string> row;
  bool first = true;
  while (reader.next(row)) {
    if (first) {
      dist.day_class = day_class_from_name(row[c_class]);
      first = false;
    }
    dist.entries.push_back({std::stol(row[c_rank]), row[c_sid],
                            std::stol(row[c_count]), std::stod(row[c_prop])});
  }
  return dist;
}

std::string rank_fit_to_json(const RankFit& fit) {
  nlohmann::json j;
  j["alpha"] = fit.alpha;
  j["beta"] = fit.beta;
  j["gamma"] = fit.gamma;
  j["norm_const"] = fit.norm_const;
  j["rmse_log"] = fit.rmse_log;
  j["n_ranks"] = fit.n_ranks;
  return j.dump(2);
}

RankFit rank_fit_from_json(const std::string& json_text) {
  auto j = nlohmann::json::parse(json_text);
  RankFit fit;
  fit.alpha = j.at("alpha").get<double>();
  fit.beta = j.at("beta").get<double>();
  fit.gamma = j.at("gamma").get<double>();
  fit.norm_const = j.at("norm_const").get<double>();
  fit.rmse_log = j.value("rmse_log", 0.0);
  fit.n_ranks = j.value("n_ranks", 0);
  return fit;
}

}  // namespace bss
