#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "bss.h"
#include "doctest.h"
#include "helpers.hpp"

using testutil::TempDir;
namespace fs = std::filesystem;

namespace {

constexpr const char* kHeader =
    "ride_id,started_at,start_station_id,ended_at,end_station_id\n";

std::string take(char* s) {
  std::string out = s ? s : "";
  bss_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("version and error strings") {
  CHECK(bss_version() != nullptr);
  CHECK(std::strlen(bss_version()) > 0);
}

TEST_CASE("divergence through the C surface") {
  const double p[2] = {0.5, 0.5};
  const double q[2] = {0.25, 0.75};
  double out = -1;
  REQUIRE(bss_js_divergence(p, q, 2, &out) == BSS_OK);
  CHECK(out == doctest::Approx(0.04879).epsilon(1e-3));
  REQUIRE(bss_kl_divergence(q, p, 2, &out) == BSS_OK);
  CHECK(out == doctest::Approx(0.18872).epsilon(1e-4));

  const double spike[2] = {1.0, 0.0};
  CHECK(bss_kl_divergence(p, spike, 2, &out) == BSS_ERR_INVALID);
  CHECK(std::strlen(bss_last_error()) > 0);
  CHECK(bss_js_divergence(nullptr, q, 2, &out) == BSS_ERR_INVALID);
  CHECK(bss_js_divergence(p, q, 0, &out) == BSS_ERR_INVALID);
}

TEST_CASE("model evaluation functions") {
  double out = 0;
  REQUIRE(bss_rank_model_eval(100, 0.3, 1e-5, 2.0, 0.05, &out) == BSS_OK);
  CHECK(out == doctest::Approx(0.05 * std::pow(100.0, -0.3) * std::exp(-0.1)));

  REQUIRE(bss_rank_corr_eval(0, 0.52, 38.7, 2000, &out) == BSS_OK);
  CHECK(out == doctest::Approx(38.7));
  CHECK(bss_rank_corr_eval(1, 1.5, 1, 100, &out) == BSS_ERR_INVALID);

  double s[3] = {0, 0, 0};
  REQUIRE(bss_rank_corr_recurrence(1.0, 0.5, 100, 3, s) == BSS_OK);
  CHECK(s[0] == 1.0);
  CHECK(s[1] == doctest::Approx(1.995));
  CHECK(bss_rank_corr_recurrence(1.0, 0.5, 100, 3, nullptr) == BSS_ERR_INVALID);

  std::vector<double> mean(20), se(20);
  REQUIRE(bss_rank_corr_simulate(20, 0.5, 100, 1, 99, 200, mean.data(),
                                 se.data()) == BSS_OK);
  std::vector<double> mean2(20), se2(20);
  REQUIRE(bss_rank_corr_simulate(20, 0.5, 100, 1, 99, 200, mean2.data(),
                                 se2.data()) == BSS_OK);
  CHECK(mean == mean2);
  CHECK(se == se2);
}

TEST_CASE("event handle lifecycle") {
  TempDir tmp("capi_events");
  const auto schema = tmp.path() / "schema.json";
  testutil::write_file(schema, testutil::kTripSchemaJson);
  const auto trips = tmp.path() / "trips.csv";
  testutil::write_file(trips,
                       std::string(kHeader) +
                           "r1,2023-10-13 08:01:00,A,2023-10-13 08:17:00,B\n"
                           "r2,2023-10-14 09:00:00,A,2023-10-14 09:30:00,A\n");

  const std::string trips_str = trips.string();
  const char* paths[1] = {trips_str.c_str()};
  bss_events* ev = nullptr;
  char* report = nullptr;
  REQUIRE(bss_events_from_trip_files(schema.string().c_str(), paths, 1, 0.01,
                                     &ev, &report) == BSS_OK);
  REQUIRE(ev != nullptr);
  CHECK(take(report).find("\"rows_ok\": 2") != std::string::npos);
  CHECK(bss_events_size(ev) == 4);  // A+B on Friday, A at 09:00 and 09:30

  char* summary = nullptr;
  REQUIRE(bss_events_summary_json(ev, "NY", "2023-10-13", "2023-10-14",
                                  &summary) == BSS_OK);
  const auto summary_text = take(summary);
  CHECK(summary_text.find("\"weekday_total\": 2") != std::string::npos);
  CHECK(summary_text.find("\"weekend_total\": 2") != std::string::npos);

  const auto saved = (tmp.path() / "events.csv").string();
  REQUIRE(bss_events_save_csv(ev, saved.c_str()) == BSS_OK);
  bss_events* loaded = nullptr;
  REQUIRE(bss_events_load_csv(saved.c_str(), &loaded) == BSS_OK);
  CHECK(bss_events_size(loaded) == bss_events_size(ev));

  REQUIRE(bss_events_filter_period(loaded, "2023-10-13", "2023-10-13") ==
          BSS_OK);
  CHECK(bss_events_size(loaded) == 2);

  bss_events_free(loaded);
  bss_events_free(ev);

  bss_events* missing = nullptr;
  CHECK(bss_events_load_csv((tmp.path() / "nope.csv").string().c_str(),
                            &missing) != BSS_OK);
  CHECK(missing == nullptr);
}

TEST_CASE("snapshot ingestion through the C surface") {
  TempDir tmp("capi_snaps");
  const auto snaps = tmp.path() / "snaps.csv";
  testutil::write_file(snaps,
                       "station_id,observed_at,bikes_available\n"
                       "A,2023-10-13T10:00,5\n"
                       "A,2023-10-13T10:01,3\n"
                       "A,2023-10-13T10:02,4\n");
  const std::string snaps_str = snaps.string();
  const char* paths[1] = {snaps_str.c_str()};
  bss_events* ev = nullptr;
  char* report = nullptr;
  REQUIRE(bss_events_from_snapshot_files(paths, 1, 5, &ev, &report) == BSS_OK);
  take(report);
  CHECK(bss_events_size(ev) == 2);  // one rental delta, one return delta
  bss_events_free(ev);
}

TEST_CASE("file-to-file stages compose into the manual pipeline") {
  TempDir tmp("capi_stages");
  testutil::make_synthetic_city(tmp.path(), "NY", 404);
  const auto schema = (tmp.path() / "NY" / "schema.json").string();
  const auto trips = (tmp.path() / "NY" / "trips.csv").string();

  const char* paths[1] = {trips.c_str()};
  bss_events* ev = nullptr;
  REQUIRE(bss_events_from_trip_files(schema.c_str(), paths, 1, 0.01, &ev,
                                     nullptr) == BSS_OK);
  const auto events_csv = (tmp.path() / "events.csv").string();
  REQUIRE(bss_events_save_csv(ev, events_csv.c_str()) == BSS_OK);
  bss_events_free(ev);

  const auto dist_csv = (tmp.path() / "dist.csv").string();
  REQUIRE(bss_stage_distributions(events_csv.c_str(), "NY", 60,
                                  dist_csv.c_str()) == BSS_OK);
  CHECK(fs::exists(dist_csv));

  const auto jsd_csv = (tmp.path() / "jsd.csv").string();
  const auto jsd_json = (tmp.path() / "jsd.json").string();
  REQUIRE(bss_stage_jsd_matrix(dist_csv.c_str(), "NY", "rental",
                               jsd_csv.c_str(), jsd_json.c_str()) == BSS_OK);
  CHECK(fs::exists(jsd_csv));
  CHECK(fs::exists(jsd_json));
  CHECK(bss_stage_jsd_matrix(dist_csv.c_str(), "Oz", "rental", jsd_csv.c_str(),
                             nullptr) != BSS_OK);

  const auto net_dir = (tmp.path() / "network").string();
  const char* dists[1] = {dist_csv.c_str()};
  REQUIRE(bss_stage_network(dists, 1, "rental", 10, 42, 1.0, 1e-9,
                            net_dir.c_str()) == BSS_OK);
  CHECK(fs::exists(fs::path(net_dir) / "nodes.csv"));
  CHECK(fs::exists(fs::path(net_dir) / "edges.csv"));

  const auto rank_wd = (tmp.path() / "rank_weekday.csv").string();
  const auto rank_we = (tmp.path() / "rank_weekend.csv").string();
  const auto fit_wd = (tmp.path() / "fit_weekday.json").string();
  REQUIRE(bss_stage_rank_fit(events_csv.c_str(), "weekday", rank_wd.c_str(),
                             fit_wd.c_str()) == BSS_OK);
  REQUIRE(bss_stage_rank_fit(events_csv.c_str(), "weekend", rank_we.c_str(),
                             nullptr) == BSS_OK);
  CHECK(fs::exists(fit_wd));
  CHECK(bss_stage_rank_fit(events_csv.c_str(), "someday", rank_wd.c_str(),
                           nullptr) == BSS_ERR_INVALID);

  const auto corr_csv = (tmp.path() / "corr.csv").string();
  REQUIRE(bss_stage_rank_compare(rank_wd.c_str(), rank_we.c_str(),
                                 corr_csv.c_str()) == BSS_OK);
  const auto model_json = (tmp.path() / "model.json").string();
  REQUIRE(bss_stage_model_fit(corr_csv.c_str(), model_json.c_str()) == BSS_OK);
  CHECK(testutil::read_file(model_json).find("\"a\"") != std::string::npos);

  const auto sim_csv = (tmp.path() / "sim.csv").string();
  REQUIRE(bss_stage_simulate(50, 0.5, 100, 1, 7, 100, sim_csv.c_str()) ==
          BSS_OK);
  CHECK(testutil::read_file(sim_csv).rfind("k,mean,stderr\n", 0) == 0);
}

TEST_CASE("pipeline and plot data through the C surface") {
  TempDir tmp("capi_pipeline");
  const auto config = testutil::make_six_city_fixture(
      tmp.path() / "data", (tmp.path() / "out").string());

  char* manifest = nullptr;
  REQUIRE(bss_run_pipeline(config.c_str(), nullptr, -1, &manifest) == BSS_OK);
  const auto text = take(manifest);
  CHECK(text.find("\"complete\": true") != std::string::npos);

  const auto plot = (tmp.path() / "plot.csv").string();
  REQUIRE(bss_plot_data((tmp.path() / "out" / "NY").string().c_str(), "fig1",
                        plot.c_str()) == BSS_OK);
  CHECK(fs::exists(plot));
  CHECK(bss_plot_data((tmp.path() / "out" / "NY").string().c_str(), "fig9",
                      plot.c_str()) == BSS_ERR_INVALID);

  // overrides redirect the output and keep the run self-contained
  char* manifest2 = nullptr;
  const auto out2 = (tmp.path() / "out2").string();
  REQUIRE(bss_run_pipeline(config.c_str(), out2.c_str(), 7, &manifest2) ==
          BSS_OK);
  const auto text2 = take(manifest2);
  CHECK(text2.find("\"seed\": 7") != std::string::npos);
  CHECK(fs::exists(fs::path(out2) / "manifest.json"));

  CHECK(bss_run_pipeline((tmp.path() / "missing.json").string().c_str(),
                         nullptr, -1, nullptr) != BSS_OK);
}
