#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bss/rankdist.hpp"

namespace bss {

// Stations used in both day classes, densely re-ranked on each side
// after intersection.
struct RankCorrespondence {
  struct Pair {
    StationId station_id;
    std::int64_t weekday_rank = 0;  // x
    std::int64_t weekend_rank = 0;  // y
  };
  std::vector<Pair> pairs;  // sorted by weekday_rank
  std::int64_t n_weekday = 0;  // N, max weekday rank
  std::int64_t m_max = 0;      // max weekend rank
};

struct RankModelFit {
  double a = 0.5;   // in (0, 1)
  double b = 1;
  std::int64_t m_max = 0;
  double rmse = 0;
  bool near_linear = false;  // a / m_max so small the curve is ~ y = x + const
};

RankCorrespondence rank_correspondence(const RankDistribution& weekday,
                                       const RankDistribution& weekend);

// y(x) = (b - M/a) (1 - a/M)^x + M/a; x counts steps beyond the top rank,
// so data ranks enter as x = rank - 1.
double model_closed_form(double x, double a, double b, double m_max);

// Mean-field recurrence S(k) = S(k-1) + (M - a S(k-1)) / M.
// Returns S(1) = s1 through S(steps).
std::vector<double> recurrence_iterate(double s1, double a, double m_max,
                                       std::size_t steps);

RankModelFit fit_rank_model(const RankCorrespondence& corr,
                            std::optional<std::pair<double, double>> init =
                                std::nullopt);

struct SimulationResult {
  std::vector<double> mean;     // mean[k-1] = mean S(k)
  std::vector<double> stderr_;  // standard error of the mean
};

// Stochastic counterpart of the recurrence: each step advances the rank by
// a Bernoulli draw with success probability (M - a S)/M clamped to [0, 1].
SimulationResult simulate_assignment(std::size_t steps, double m_max, double a,
                                     double s1, std::uint64_t seed,
                                     std::size_t trials);

void write_correspondence_csv(const RankCorrespondence& corr,
                              const std::string& path);
RankCorrespondence read_correspondence_csv(const std::string& path);
std::string rank_model_to_json(const RankModelFit& fit);
RankModelFit rank_model_from_json(const std::string& json_text);
void write_simulation_csv(const SimulationResult& sim, const std::string& path);

}  // namespace bss
