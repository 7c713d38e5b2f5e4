#include "bss.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "bss/divergence.hpp"
#include "bss/error.hpp"
#include "bss/ingest.hpp"
#include "bss/jsdnet.hpp"
#include "bss/pipeline.hpp"
#include "bss/rankdist.hpp"
#include "bss/rankmodel.hpp"
#include "bss/timeseries.hpp"
#include "json.hpp"

namespace {

thread_local std::string g_last_error;

bss_status to_status(bss::ErrorCode code) {
  switch (code) {
    case bss::ErrorCode::invalid_argument: return BSS_ERR_INVALID;
    case bss::ErrorCode::io: return BSS_ERR_IO;
    case bss::ErrorCode::parse: return BSS_ERR_PARSE;
    case bss::ErrorCode::no_convergence: return BSS_ERR_NOCONVERGE;
    case bss::ErrorCode::stage_failure: return BSS_ERR_STAGE;
  }
  return BSS_ERR_INVALID;
}

template <typename Fn>
bss_status guarded(Fn&& fn) {
  try {
    fn();
    return BSS_OK;
  } catch (const bss::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BSS_ERR_INVALID;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

bss_status invalid(const char* msg) {
  g_last_error = msg;
  return BSS_ERR_INVALID;
}

}  // namespace

struct bss_events {
  std::vector<bss::UsageEvent> events;
};

extern "C" {

const char* bss_version(void) { return "0.1.0"; }

const char* bss_last_error(void) { return g_last_error.c_str(); }

void bss_string_free(char* s) { std::free(s); }

bss_status bss_kl_divergence(const double* p, const double* q, size_t n,
                             double* out) {
  if (!p || !q || !out) return invalid("null argument");
  return guarded([&] { *out = bss::kl_divergence({p, n}, {q, n}); });
}

bss_status bss_js_divergence(const double* p, const double* q, size_t n,
                             double* out) {
  if (!p || !q || !out) return invalid("null argument");
  return guarded([&] { *out = bss::js_divergence({p, n}, {q, n}); });
}

bss_status bss_rank_model_eval(double k, double alpha, double beta,
                               double gamma, double norm_const, double* out) {
  if (!out) return invalid("null argument");
  if (k < 1) return invalid("rank must be >= 1");
  bss::RankFit fit;
  fit.alpha = alpha;
  fit.beta = beta;
  fit.gamma = gamma;
  fit.norm_const = norm_const;
  *out = bss::evaluate_rank_model(fit, k);
  return BSS_OK;
}

bss_status bss_rank_corr_eval(double x, double a, double b, double m_max,
                              double* out) {
  if (!out) return invalid("null argument");
  return guarded([&] { *out = bss::model_closed_form(x, a, b, m_max); });
}

bss_status bss_rank_corr_recurrence(double s1, double a, double m_max,
                                    size_t steps, double* out) {
  if (!out) return invalid("null argument");
  return guarded([&] {
    auto s = bss::recurrence_iterate(s1, a, m_max, steps);
    std::memcpy(out, s.data(), s.size() * sizeof(double));
  });
}

bss_status bss_rank_corr_simulate(size_t steps, double a, double m_max,
                                  double s1, uint64_t seed, size_t trials,
                                  double* mean, double* stderr_out) {
  if (!mean || !stderr_out) return invalid("null argument");
  return guarded([&] {
    auto sim = bss::simulate_assignment(steps, m_max, a, s1, seed, trials);
    std::memcpy(mean, sim.mean.data(), steps * sizeof(double));
    std::memcpy(stderr_out, sim.stderr_.data(), steps * sizeof(double));
  });
}

bss_status bss_events_from_trip_files(const char* schema_path,
                                      const char* const* paths, size_t n_paths,
                                      double malformed_threshold,
                                      bss_events** out, char** report_json) {
  if (!schema_path || !paths || !out) return invalid("null argument");
  return guarded([&] {
    const auto schema = bss::load_trip_schema(schema_path);
    std::vector<bss::TripRecord> trips;
    bss::ParseReport pr;
    for (size_t i = 0; i < n_paths; ++i) {
      auto part = bss::parse_trip_file(paths[i], schema, pr, malformed_threshold);
      trips.insert(trips.end(), part.begin(), part.end());
    }
    auto* handle = new bss_events{bss::trips_to_events(trips)};
    *out = handle;
    if (report_json) {
      nlohmann::json j{{"rows_total", pr.rows_total},
                       {"rows_ok", pr.rows_ok},
                       {"malformed", pr.malformed_count}};
      *report_json = dup_string(j.dump(2));
    }
  });
}

bss_status bss_events_from_snapshot_files(const char* const* paths,
                                          size_t n_paths, int max_gap_minutes,
                                          bss_events** out,
                                          char** report_json) {
  if (!paths || !out) return invalid("null argument");
  return guarded([&] {
    std::vector<bss::StationSnapshot> snaps;
    bss::ParseReport pr;
    for (size_t i = 0; i < n_paths; ++i) {
      auto part = bss::parse_snapshot_file(paths[i], pr);
      snaps.insert(snaps.end(), part.begin(), part.end());
    }
    std::stable_sort(snaps.begin(), snaps.end(),
                     [](const auto& a, const auto& b) {
                       if (a.station_id != b.station_id)
                         return a.station_id < b.station_id;
                       return a.observed_at < b.observed_at;
                     });
    bss::GapReport gaps;
    auto* handle =
        new bss_events{bss::snapshots_to_events(snaps, max_gap_minutes, gaps)};
    *out = handle;
    if (report_json) {
      nlohmann::json j{{"rows_total", pr.rows_total},
                       {"rows_ok", pr.rows_ok},
                       {"malformed", pr.malformed_count},
                       {"gaps", gaps.gaps},
                       {"pairs_used", gaps.pairs_used}};
      *report_json = dup_string(j.dump(2));
    }
  });
}

bss_status bss_events_load_csv(const char* path, bss_events** out) {
  if (!path || !out) return invalid("null argument");
  return guarded([&] { *out = new bss_events{bss::read_events_csv(path)}; });
}

bss_status bss_events_save_csv(const bss_events* ev, const char* path) {
  if (!ev || !path) return invalid("null argument");
  return guarded([&] { bss::write_events_csv(ev->events, path); });
}

size_t bss_events_size(const bss_events* ev) {
  return ev ? ev->events.size() : 0;
}

bss_status bss_events_summary_json(const bss_events* ev, const char* city,
                                   const char* period_start,
                                   const char* period_end, char** json_out) {
  if (!ev || !city || !period_start || !period_end || !json_out) {
    return invalid("null argument");
  }
  return guarded([&] {
    const bss::Calendar cal{bss::parse_date(period_start),
                            bss::parse_date(period_end)};
    *json_out = dup_string(
        bss::summary_to_json(bss::summarize(ev->events, city, cal)));
  });
}

bss_status bss_events_filter_period(bss_events* ev, const char* period_start,
                                    const char* period_end) {
  if (!ev || !period_start || !period_end) return invalid("null argument");
  return guarded([&] {
    const bss::Calendar cal{bss::parse_date(period_start),
                            bss::parse_date(period_end)};
    ev->events = bss::filter_period(ev->events, cal);
  });
}

void bss_events_free(bss_events* ev) { delete ev; }

bss_status bss_stage_distributions(const char* events_csv, const char* city,
                                   int bin_width, const char* out_csv) {
  if (!events_csv || !city || !out_csv) return invalid("null argument");
  return guarded([&] {
    const auto events = bss::read_events_csv(events_csv);
    const auto dists = bss::distribution_set(events, city, bin_width);
    bss::write_distributions_csv(dists, out_csv);
  });
}

bss_status bss_stage_jsd_matrix(const char* dist_csv, const char* city,
                                const char* direction, const char* out_csv,
                                const char* out_json) {
  if (!dist_csv || !city || !direction || !out_csv) {
    return invalid("null argument");
  }
  return guarded([&] {
    const auto dir = bss::direction_from_name(direction);
    const auto all = bss::read_distributions_csv(dist_csv);
    std::vector<bss::DayDistribution> days;
    for (int d = 0; d < 7; ++d) {
      for (const auto& dist : all) {
        if (dist.city == city && dist.direction == dir &&
            dist.day == bss::kDayNames[d]) {
          days.push_back(dist);
        }
      }
    }
    if (days.size() != 7) {
      throw bss::Error(bss::ErrorCode::invalid_argument,
                       std::string("expected 7 day distributions for ") + city +
                           "/" + direction + ", found " +
                           std::to_string(days.size()));
    }
    const auto m = bss::jsd_day_matrix(days);
    bss::write_matrix_csv(m, out_csv);
    if (out_json) {
      std::ofstream j(out_json);
      if (!j) throw bss::Error(bss::ErrorCode::io, "cannot write json");
      j << bss::matrix_to_json(m) << '\n';
    }
  });
}

bss_status bss_stage_network(const char* const* dist_csvs, size_t n,
                             const char* direction, size_t top_k,
                             uint64_t seed, double resolution, double epsilon,
                             const char* out_dir) {
  if (!dist_csvs || !direction || !out_dir) return invalid("null argument");
  return guarded([&] {
    const auto dir = bss::direction_from_name(direction);
    std::vector<bss::DayDistribution> all;
    for (size_t i = 0; i < n; ++i) {
      for (auto& d : bss::read_distributions_csv(dist_csvs[i])) {
        if (d.direction == dir) {
          bool is_day = false;
          for (const char* name : bss::kDayNames) {
            if (d.day == name) is_day = true;
          }
          if (is_day) all.push_back(std::move(d));
        }
      }
    }
    bss::JsdNetwork net = bss::build_network(all, epsilon);
    bss::detect_communities(net, seed, resolution);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path base(out_dir);
    bss::write_network_csv(net, top_k, (base / "nodes.csv").string(),
                           (base / "edges.csv").string());
    std::ofstream j(base / "network.json");
    if (!j) throw bss::Error(bss::ErrorCode::io, "cannot write network.json");
    j << bss::network_to_json(net, top_k) << '\n';
  });
}

bss_status bss_stage_rank_fit(const char* events_csv, const char* day_class,
                              const char* out_rank_csv,
                              const char* out_fit_json) {
  if (!events_csv || !day_class || !out_rank_csv) {
    return invalid("null argument");
  }
  return guarded([&] {
    const auto events = bss::read_events_csv(events_csv);
    const auto dist =
        bss::rank_stations(events, bss::day_class_from_name(day_class));
    bss::write_rank_csv(dist, out_rank_csv);
    if (out_fit_json) {
      std::ofstream j(out_fit_json);
      if (!j) throw bss::Error(bss::ErrorCode::io, "cannot write fit json");
      j << bss::rank_fit_to_json(bss::fit_rank_distribution(dist)) << '\n';
    }
  });
}

bss_status bss_stage_rank_compare(const char* weekday_rank_csv,
                                  const char* weekend_rank_csv,
                                  const char* out_csv) {
  if (!weekday_rank_csv || !weekend_rank_csv || !out_csv) {
    return invalid("null argument");
  }
  return guarded([&] {
    const auto corr =
        bss::rank_correspondence(bss::read_rank_csv(weekday_rank_csv),
                                 bss::read_rank_csv(weekend_rank_csv));
    bss::write_correspondence_csv(corr, out_csv);
  });
}

bss_status bss_stage_model_fit(const char* correspondence_csv,
                               const char* out_json) {
  if (!correspondence_csv || !out_json) return invalid("null argument");
  return guarded([&] {
    const auto corr = bss::read_correspondence_csv(correspondence_csv);
    std::ofstream j(out_json);
    if (!j) throw bss::Error(bss::ErrorCode::io, "cannot write model json");
    j << bss::rank_model_to_json(bss::fit_rank_model(corr)) << '\n';
  });
}

bss_status bss_stage_simulate(size_t steps, double a, double m_max, double s1,
                              uint64_t seed, size_t trials,
                              const char* out_csv) {
  if (!out_csv) return invalid("null argument");
  return guarded([&] {
    const auto sim = bss::simulate_assignment(steps, m_max, a, s1, seed, trials);
    bss::write_simulation_csv(sim, out_csv);
  });
}

bss_status bss_run_pipeline(const char* config_path,
                            const char* out_dir_override,
                            int64_t seed_override, char** manifest_json) {
  if (!config_path) return invalid("null argument");
  return guarded([&] {
    auto cfg = bss::load_pipeline_config(config_path);
    if (out_dir_override) cfg.output_dir = out_dir_override;
    if (seed_override >= 0) cfg.seed = static_cast<uint64_t>(seed_override);
    const std::string manifest = bss::run_pipeline(cfg);
    if (manifest_json) *manifest_json = dup_string(manifest);
  });
}

bss_status bss_plot_data(const char* stage_path, const char* figure,
                         const char* out_csv) {
  if (!stage_path || !figure || !out_csv) return invalid("null argument");
  return guarded([&] { bss::emit_plot_data(stage_path, figure, out_csv); });
}

}  // extern "C"
