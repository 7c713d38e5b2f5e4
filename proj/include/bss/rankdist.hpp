#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bss/error.hpp"
#include "bss/ingest.hpp"

namespace bss {

struct RankEntry {
  std::int64_t rank = 0;  // 1-based, consecutive
  StationId station_id;
  std::int64_t count = 0;
  double proportion = 0;
};

struct RankDistribution {
  DayClass day_class = DayClass::weekday;
  std::vector<RankEntry> entries;  // sorted by count desc, ties by id asc
};

// Predicted P(k) = norm_const * k^-alpha * exp(-beta * k^gamma).
struct RankFit {
  double alpha = 0;
  double beta = 0;
  double gamma = 1;
  double norm_const = 1;
  double rmse_log = 0;
  std::int64_t n_ranks = 0;
};

struct RankFitInit {
  double alpha = 0;
  double beta = 0;
  double gamma = 2;
};

// Usage count = rentals + returns summed over matching dates.
RankDistribution rank_stations(const std::vector<UsageEvent>& events,
                               DayClass day_class);

// Log-space unweighted least squares by damped Gauss-Newton. Bounds:
// alpha in [0, 5], beta in [0, 1], gamma in [0.1, 5]. Throws FitError
// (best-so-far attached) on non-convergence.
RankFit fit_rank_distribution(const RankDistribution& dist,
                              std::optional<RankFitInit> init = std::nullopt);

double evaluate_rank_model(const RankFit& fit, double k);

class FitError : public Error {
public:
  FitError(std::string msg, RankFit best)
      : Error(ErrorCode::no_convergence, std::move(msg)), best_(best) {}
  const RankFit& best() const { return best_; }

private:
  RankFit best_;
};

void write_rank_csv(const RankDistribution& dist, const std::string& path);
RankDistribution read_rank_csv(const std::string& path);
std::string rank_fit_to_json(const RankFit& fit);
RankFit rank_fit_from_json(const std::string& json_text);

std::string day_class_name(DayClass c);
DayClass day_class_from_name(const std::string& name);

}  // namespace bss
