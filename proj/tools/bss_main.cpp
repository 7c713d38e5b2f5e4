// Command-line front end. Everything analytical goes through the C API in
// bss.h; this file only parses arguments and shuffles file paths.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bss.h"

namespace fs = std::filesystem;

namespace {

bool g_verbose = false;

void log_verbose(const std::string& msg) {
  if (g_verbose) std::fprintf(stderr, "[bss] %s\n", msg.c_str());
}

int exit_code(bss_status st) {
  if (st == BSS_OK) return 0;
  std::fprintf(stderr, "error: %s\n", bss_last_error());
  return st == BSS_ERR_STAGE ? 3 : 2;
}

bool wildcard_match(const std::string& pat, const std::string& text) {
  size_t p = 0, t = 0, star = std::string::npos, mark = 0;
  while (t < text.size()) {
    if (p < pat.size() && (pat[p] == '?' || pat[p] == text[t])) {
      ++p, ++t;
    } else if (p < pat.size() && pat[p] == '*') {
      star = p++;
      mark = t;
    } else if (star != std::string::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pat.size() && pat[p] == '*') ++p;
  return p == pat.size();
}

std::vector<std::string> expand_inputs(const std::vector<std::string>& globs) {
  std::vector<std::string> files;
  for (const auto& g : globs) {
    const fs::path pat(g);
    const std::string leaf = pat.filename().string();
    if (leaf.find_first_of("*?") == std::string::npos) {
      files.push_back(g);
      continue;
    }
    const fs::path dir = pat.parent_path().empty() ? "." : pat.parent_path();
    std::vector<std::string> matched;
    if (fs::is_directory(dir)) {
      for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() &&
            wildcard_match(leaf, e.path().filename().string())) {
          matched.push_back(e.path().string());
        }
      }
    }
    std::sort(matched.begin(), matched.end());
    files.insert(files.end(), matched.begin(), matched.end());
  }
  return files;
}

std::vector<const char*> as_argv(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bike-sharing usage pattern analysis toolkit"};
  app.require_subcommand(1);
  app.add_flag("--verbose", g_verbose, "verbose progress on stderr");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "raw city files -> canonical event CSV");
  std::string in_city, in_schema, in_out = "events.csv", in_summary;
  std::vector<std::string> in_inputs;
  std::string in_period_start, in_period_end;
  int in_max_gap = 5;
  double in_threshold = 0.01;
  bool in_snapshots = false;
  ingest->add_option("--city", in_city, "city label")->required();
  ingest->add_option("--schema", in_schema, "trip schema JSON (trip cities)");
  ingest->add_option("--input", in_inputs, "input file(s) or glob(s)")->required();
  ingest->add_option("--out", in_out, "output event CSV");
  ingest->add_flag("--snapshots", in_snapshots, "inputs are station snapshots");
  ingest->add_option("--max-gap", in_max_gap, "snapshot gap limit, minutes");
  ingest->add_option("--threshold", in_threshold, "malformed row threshold");
  ingest->add_option("--period-start", in_period_start, "filter period start (YYYY-MM-DD)");
  ingest->add_option("--period-end", in_period_end, "filter period end");
  ingest->add_option("--summary", in_summary, "also write a summary JSON");

  // distributions
  auto* dists = app.add_subcommand("distributions", "events -> day-of-week distributions");
  std::string d_events, d_city, d_out = "dist.csv";
  int d_bin = 60;
  dists->add_option("--events", d_events)->required();
  dists->add_option("--city", d_city)->required();
  dists->add_option("--bin", d_bin, "bin width in minutes");
  dists->add_option("--out", d_out);

  // jsd-matrix
  auto* jm = app.add_subcommand("jsd-matrix", "7x7 day JSD matrix for one city");
  std::string jm_dist, jm_city, jm_out = "jsd.csv", jm_json, jm_dir = "rental";
  jm->add_option("--dist", jm_dist, "distribution CSV")->required();
  jm->add_option("--city", jm_city)->required();
  jm->add_option("--direction", jm_dir, "rental | return | combined");
  jm->add_option("--out", jm_out);
  jm->add_option("--json", jm_json, "also write matrix JSON");

  // jsd-network
  auto* jn = app.add_subcommand("jsd-network", "inverse-JSD network + Louvain communities");
  std::vector<std::string> jn_dists;
  std::string jn_dist_dir, jn_out = "net", jn_dir = "rental";
  std::size_t jn_top = 50;
  std::uint64_t jn_seed = 42;
  double jn_resolution = 1.0, jn_epsilon = 1e-9;
  jn->add_option("--dist", jn_dists, "distribution CSV(s)");
  jn->add_option("--dist-dir", jn_dist_dir, "directory scanned for dist CSVs");
  jn->add_option("--direction", jn_dir);
  jn->add_option("--top", jn_top, "top-k edge flag count");
  jn->add_option("--seed", jn_seed);
  jn->add_option("--resolution", jn_resolution);
  jn->add_option("--epsilon", jn_epsilon, "JSD floor for weight capping");
  jn->add_option("--out", jn_out, "output directory");

  // rank-fit
  auto* rf = app.add_subcommand("rank-fit", "station rank distribution + truncated power-law fit");
  std::string rf_events, rf_class = "weekday", rf_out = "fit.json", rf_rank_csv;
  rf->add_option("--events", rf_events)->required();
  rf->add_option("--day-class", rf_class, "weekday | weekend");
  rf->add_option("--out", rf_out, "fit JSON");
  rf->add_option("--rank-csv", rf_rank_csv, "also write the rank CSV");

  // rank-compare
  auto* rc = app.add_subcommand("rank-compare", "weekday vs weekend rank pairing");
  std::string rc_wd, rc_we, rc_out = "correspondence.csv";
  rc->add_option("--weekday", rc_wd, "weekday rank CSV")->required();
  rc->add_option("--weekend", rc_we, "weekend rank CSV")->required();
  rc->add_option("--out", rc_out);

  // model-fit
  auto* mf = app.add_subcommand("model-fit", "fit the rank correspondence model");
  std::string mf_corr, mf_out = "model.json";
  mf->add_option("--corr", mf_corr, "correspondence CSV")->required();
  mf->add_option("--out", mf_out);

  // simulate-model
  auto* sm = app.add_subcommand("simulate-model", "Monte Carlo occupancy simulation");
  double sm_a = 0.5, sm_m = 100, sm_s1 = 1;
  std::size_t sm_n = 100, sm_trials = 100000;
  std::uint64_t sm_seed = 7;
  std::string sm_out = "sim.csv";
  sm->add_option("--a", sm_a, "decay parameter, 0 < a < 1");
  sm->add_option("--m", sm_m, "maximum weekend rank");
  sm->add_option("--n", sm_n, "number of steps (weekday ranks)");
  sm->add_option("--s1", sm_s1, "initial weekend rank");
  sm->add_option("--trials", sm_trials);
  sm->add_option("--seed", sm_seed);
  sm->add_option("--out", sm_out);

  // run
  auto* run = app.add_subcommand("run", "full pipeline from a JSON config");
  std::string run_config, run_out;
  std::int64_t run_seed = -1;
  run->add_option("--config", run_config)->required();
  run->add_option("--out", run_out, "override output directory");
  run->add_option("--seed", run_seed, "override config seed");

  // plot-data
  auto* pd = app.add_subcommand("plot-data", "plot-ready CSV for fig1..fig5");
  std::string pd_in, pd_fig, pd_out = "plot.csv";
  pd->add_option("--in", pd_in, "stage output file or directory")->required();
  pd->add_option("--figure", pd_fig, "fig1 | fig2 | fig3 | fig4 | fig5")->required();
  pd->add_option("--out", pd_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc_code = app.exit(e);
    return rc_code == 0 ? 0 : 2;
  }

  if (ingest->parsed()) {
    const auto files = expand_inputs(in_inputs);
    if (files.empty()) {
      std::fprintf(stderr, "error: no input files match\n");
      return 2;
    }
    if (!in_snapshots && in_schema.empty()) {
      std::fprintf(stderr, "error: --schema is required for trip inputs\n");
      return 2;
    }
    log_verbose("ingesting " + std::to_string(files.size()) + " file(s)");
    auto argv_files = as_argv(files);
    bss_events* ev = nullptr;
    char* report = nullptr;
    bss_status st;
    if (in_snapshots) {
      st = bss_events_from_snapshot_files(argv_files.data(), argv_files.size(),
                                          in_max_gap, &ev, &report);
    } else {
      st = bss_events_from_trip_files(in_schema.c_str(), argv_files.data(),
                                      argv_files.size(), in_threshold, &ev,
                                      &report);
    }
    if (st != BSS_OK) return exit_code(st);
    if (report) {
      log_verbose(std::string("ingest report: ") + report);
      bss_string_free(report);
    }
    if (!in_period_start.empty() && !in_period_end.empty()) {
      st = bss_events_filter_period(ev, in_period_start.c_str(),
                                    in_period_end.c_str());
      if (st != BSS_OK) {
        bss_events_free(ev);
        return exit_code(st);
      }
    }
    st = bss_events_save_csv(ev, in_out.c_str());
    if (st == BSS_OK && !in_summary.empty()) {
      if (in_period_start.empty() || in_period_end.empty()) {
        std::fprintf(stderr, "error: --summary needs --period-start/--period-end\n");
        bss_events_free(ev);
        return 2;
      }
      char* json = nullptr;
      st = bss_events_summary_json(ev, in_city.c_str(), in_period_start.c_str(),
                                   in_period_end.c_str(), &json);
      if (st == BSS_OK) {
        std::FILE* f = std::fopen(in_summary.c_str(), "w");
        if (f) {
          std::fputs(json, f);
          std::fputc('\n', f);
          std::fclose(f);
        }
        bss_string_free(json);
      }
    }
    log_verbose("wrote " + std::to_string(bss_events_size(ev)) + " events");
    bss_events_free(ev);
    return exit_code(st);
  }

  if (dists->parsed()) {
    return exit_code(bss_stage_distributions(d_events.c_str(), d_city.c_str(),
                                             d_bin, d_out.c_str()));
  }

  if (jm->parsed()) {
    return exit_code(bss_stage_jsd_matrix(
        jm_dist.c_str(), jm_city.c_str(), jm_dir.c_str(), jm_out.c_str(),
        jm_json.empty() ? nullptr : jm_json.c_str()));
  }

  if (jn->parsed()) {
    std::vector<std::string> files = jn_dists;
    if (!jn_dist_dir.empty() && fs::is_directory(jn_dist_dir)) {
      std::vector<std::string> found;
      for (const auto& e : fs::recursive_directory_iterator(jn_dist_dir)) {
        if (e.is_regular_file() && e.path().extension() == ".csv") {
          found.push_back(e.path().string());
        }
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    }
    if (files.empty()) {
      std::fprintf(stderr, "error: no distribution CSVs given\n");
      return 2;
    }
    auto argv_files = as_argv(files);
    return exit_code(bss_stage_network(argv_files.data(), argv_files.size(),
                                       jn_dir.c_str(), jn_top, jn_seed,
                                       jn_resolution, jn_epsilon,
                                       jn_out.c_str()));
  }

  if (rf->parsed()) {
    const std::string rank_csv =
        rf_rank_csv.empty() ? rf_out + ".rank.csv" : rf_rank_csv;
    return exit_code(bss_stage_rank_fit(rf_events.c_str(), rf_class.c_str(),
                                        rank_csv.c_str(), rf_out.c_str()));
  }

  if (rc->parsed()) {
    return exit_code(bss_stage_rank_compare(rc_wd.c_str(), rc_we.c_str(),
                                            rc_out.c_str()));
  }

  if (mf->parsed()) {
    return exit_code(bss_stage_model_fit(mf_corr.c_str(), mf_out.c_str()));
  }

  if (sm->parsed()) {
    return exit_code(bss_stage_simulate(sm_n, sm_a, sm_m, sm_s1, sm_seed,
                                        sm_trials, sm_out.c_str()));
  }

  if (run->parsed()) {
    char* manifest = nullptr;
    const bss_status st = bss_run_pipeline(
        run_config.c_str(), run_out.empty() ? nullptr : run_out.c_str(),
        run_seed, &manifest);
    if (manifest) {
      if (g_verbose) std::fprintf(stderr, "%s\n", manifest);
      bss_string_free(manifest);
    }
    return exit_code(st);
  }

  if (pd->parsed()) {
    return exit_code(
        bss_plot_data(pd_in.c_str(), pd_fig.c_str(), pd_out.c_str()));
  }

  return 2;
}
