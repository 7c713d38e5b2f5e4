#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bss/civil_time.hpp"
#include "bss/timeseries.hpp"

namespace bss {

struct CityConfig {
  std::string id;
  std::string timezone;
  std::string schema_path;   // empty for snapshot cities
  bool snapshots = false;
  std::string input_glob;
  CivilDate period_start;
  CivilDate period_end;
};

struct PipelineConfig {
  std::vector<CityConfig> cities;
  int bin_width = 60;
  Direction direction = Direction::rental;
  std::size_t top_k_edges = 50;
  std::uint64_t seed = 42;
  double epsilon = 1e-9;
  double resolution = 1.0;
  int max_gap = 5;
  double malformed_threshold = 0.01;
  int period_days = 30;
  std::string output_dir;
};

PipelineConfig load_pipeline_config(const std::string& path);
PipelineConfig parse_pipeline_config(const std::string& json_text,
                                     const std::string& base_dir);

// Fails fast (before any stage) when referenced paths are missing, a glob
// matches nothing, or a city period does not span period_days days.
void validate_config(const PipelineConfig& config);

// Runs ingest -> distributions -> jsd-matrix -> rank-fit -> rank-model per
// city, then the cross-city jsd-network. Returns the manifest JSON, also
// written to <output_dir>/manifest.json. Deterministic: identical inputs,
// config and seed give byte-identical outputs.
std::string run_pipeline(const PipelineConfig& config);

// Tidy per-figure CSV from a stage output file or directory.
void emit_plot_data(const std::string& stage_path, const std::string& figure,
                    const std::string& out_csv);

// '*' / '?' wildcards in the final path component; results sorted.
std::vector<std::string> expand_glob(const std::string& pattern);

// FNV-1a 64-bit content digest as 16 hex chars.
std::string digest_file(const std::string& path);
std::string digest_bytes(const std::string& bytes);

// Stage sub-seed derivation: every random consumer gets
// splitmix64(master ^ fnv1a(stage_name)).
std::uint64_t derive_seed(std::uint64_t master, const std::string& stage);

}  // namespace bss
