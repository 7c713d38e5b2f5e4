#include "bss/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "bss/csv.hpp"
#include "bss/divergence.hpp"
#include "bss/error.hpp"
#include "bss/ingest.hpp"
#include "bss/jsdnet.hpp"
#include "bss/num_format.hpp"
#include "bss/rankdist.hpp"
#include "bss/rankmodel.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace bss {

namespace {

constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a(const char* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool wildcard_match(const std::string& pat, const std::string& text) {
  std::size_t p = 0, t = 0, star = std::string::npos, mark = 0;
  while (t < text.size()) {
    if (p < pat.size() && (pat[p] == '?' || pat[p] == text[t])) {
      ++p;
      ++t;
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

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool is_london(const std::string& city_id) {
  std::string lower;
  for (char c : city_id) lower += static_cast<char>(std::tolower(c));
  return lower == "london" || lower == "lon";
}

}  // namespace

std::vector<std::string> expand_glob(const std::string& pattern) {
  const fs::path pat(pattern);
  const std::string leaf = pat.filename().string();
  if (leaf.find_first_of("*?") == std::string::npos) {
    return fs::exists(pat) ? std::vector<std::string>{pattern}
                           : std::vector<std::string>{};
  }
  const fs::path dir = pat.parent_path().empty() ? "." : pat.parent_path();
  std::vector<std::string> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (wildcard_match(leaf, entry.path().filename().string())) {
      out.push_back(entry.path().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string digest_bytes(const std::string& bytes) {
  return hex64(fnv1a(bytes.data(), bytes.size()));
}

std::string digest_file(const std::string& path) {
  return digest_bytes(read_text(path));
}

std::uint64_t derive_seed(std::uint64_t master, const std::string& stage) {
  return splitmix64(master ^ fnv1a(stage.data(), stage.size()));
}

PipelineConfig parse_pipeline_config(const std::string& json_text,
                                     const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, std::string("config: ") + e.what());
  }
  PipelineConfig cfg;
  auto resolve = [&](const std::string& p) {
    if (p.empty() || fs::path(p).is_absolute() || base_dir.empty()) return p;
    return (fs::path(base_dir) / p).string();
  };
  try {
    for (const auto& jc : j.at("cities")) {
      CityConfig c;
      c.id = jc.at("id").get<std::string>();
      c.timezone = jc.value("timezone", "");
      c.snapshots = jc.value("snapshots", false);
      if (!c.snapshots) c.schema_path = resolve(jc.at("schema").get<std::string>());
      c.input_glob = resolve(jc.at("inputs").get<std::string>());
      const auto& period = jc.at("period");
      c.period_start = parse_date(period.at(0).get<std::string>());
      c.period_end = parse_date(period.at(1).get<std::string>());
      cfg.cities.push_back(std::move(c));
    }
    cfg.bin_width = j.value("bin_width", 60);
    cfg.direction = direction_from_name(j.value("direction", "rental"));
    cfg.top_k_edges = j.value("top_k_edges", std::size_t{50});
    cfg.seed = j.value("seed", std::uint64_t{42});
    cfg.epsilon = j.value("epsilon", 1e-9);
    cfg.resolution = j.value("resolution", 1.0);
    cfg.max_gap = j.value("max_gap", 5);
    cfg.malformed_threshold = j.value("malformed_threshold", 0.01);
    cfg.period_days = j.value("period_days", 30);
    cfg.output_dir = resolve(j.value("output_dir", "out"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, std::string("config: ") + e.what());
  }
  return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  return parse_pipeline_config(read_text(path),
                               fs::path(path).parent_path().string());
}

void validate_config(const PipelineConfig& config) {
  if (config.cities.empty()) {
    throw Error(ErrorCode::invalid_argument, "config lists no cities");
  }
  if (config.bin_width <= 0 || 1440 % config.bin_width != 0) {
    throw Error(ErrorCode::invalid_argument, "bin_width must divide 1440");
  }
  for (const auto& c : config.cities) {
    const auto span = days_from_civil(c.period_end) -
                      days_from_civil(c.period_start) + 1;
    if (span != config.period_days) {
      throw Error(ErrorCode::invalid_argument,
                  "city " + c.id + ": period spans " + std::to_string(span) +
                      " days, expected " + std::to_string(config.period_days));
    }
    if (!c.snapshots && !fs::exists(c.schema_path)) {
      throw Error(ErrorCode::invalid_argument,
                  "city " + c.id + ": schema file missing: " + c.schema_path);
    }
    if (expand_glob(c.input_glob).empty()) {
      throw Error(ErrorCode::invalid_argument,
                  "city " + c.id + ": no input matches " + c.input_glob);
    }
  }
}

namespace {

struct CityOutputs {
  std::vector<UsageEvent> events;
  std::map<std::pair<int, Direction>, DayDistribution> dists;
};

void add_outputs(json& manifest, const std::string& out_dir,
                 const std::string& stage, const std::string& city,
                 const std::vector<std::string>& rel_paths) {
  for (const auto& rel : rel_paths) {
    manifest["stages"][stage][city].push_back(rel);
    manifest["outputs"][rel] =
        digest_file((fs::path(out_dir) / rel).string());
  }
}

}  // namespace

std::string run_pipeline(const PipelineConfig& config) {
  validate_config(config);
  const std::string& out_dir = config.output_dir;
  fs::create_directories(out_dir);

  json manifest;
  manifest["version"] = kVersion;
  manifest["seed"] = config.seed;
  manifest["complete"] = false;

  // config hash: digest of the canonicalized effective config
  {
    json jc;
    for (const auto& c : config.cities) {
      jc["cities"].push_back({{"id", c.id},
                              {"timezone", c.timezone},
                              {"schema", c.schema_path},
                              {"snapshots", c.snapshots},
                              {"inputs", c.input_glob},
                              {"period",
                               {format_date(c.period_start),
                                format_date(c.period_end)}}});
    }
    jc["bin_width"] = config.bin_width;
    jc["direction"] = direction_name(config.direction);
    jc["top_k_edges"] = config.top_k_edges;
    jc["seed"] = config.seed;
    jc["epsilon"] = config.epsilon;
    jc["resolution"] = config.resolution;
    jc["max_gap"] = config.max_gap;
    jc["malformed_threshold"] = config.malformed_threshold;
    jc["period_days"] = config.period_days;
    manifest["config_hash"] = digest_bytes(jc.dump());
    manifest["config"] = jc;
  }
  for (const auto& c : config.cities) {
    for (const auto& input : expand_glob(c.input_glob)) {
      manifest["inputs"][input] = digest_file(input);
    }
  }

  std::string stage = "validate";
  std::string city_id;
  try {
    std::map<std::string, CityOutputs> per_city;
    for (const auto& c : config.cities) {
      city_id = c.id;
      const fs::path city_dir = fs::path(out_dir) / c.id;
      fs::create_directories(city_dir);
      auto& co = per_city[c.id];
      const Calendar cal{c.period_start, c.period_end};

      stage = "ingest";
      {
        json report;
        std::vector<UsageEvent> events;
        if (c.snapshots) {
          std::vector<StationSnapshot> snaps;
          ParseReport pr;
          for (const auto& f : expand_glob(c.input_glob)) {
            auto part = parse_snapshot_file(f, pr, config.malformed_threshold);
            snaps.insert(snaps.end(), part.begin(), part.end());
          }
          std::stable_sort(snaps.begin(), snaps.end(),
                           [](const auto& a, const auto& b) {
                             if (a.station_id != b.station_id)
                               return a.station_id < b.station_id;
                             return a.observed_at < b.observed_at;
                           });
          GapReport gaps;
          events = snapshots_to_events(snaps, config.max_gap, gaps);
          report["rows_total"] = pr.rows_total;
          report["malformed"] = pr.malformed_count;
          report["gaps"] = gaps.gaps;
        } else {
          const TripSchema schema = load_trip_schema(c.schema_path);
          std::vector<TripRecord> trips;
          ParseReport pr;
          for (const auto& f : expand_glob(c.input_glob)) {
            auto part = parse_trip_file(f, schema, pr, config.malformed_threshold);
            trips.insert(trips.end(), part.begin(), part.end());
          }
          events = trips_to_events(trips);
          report["rows_total"] = pr.rows_total;
          report["malformed"] = pr.malformed_count;
        }
        co.events = filter_period(events, cal);
        report["events_in_period"] = co.events.size();
        report["events_parsed"] = events.size();
        write_events_csv(co.events, (city_dir / "events.csv").string());
        write_text((city_dir / "summary.json").string(),
                   summary_to_json(summarize(co.events, c.id, cal)));
        write_text((city_dir / "ingest_report.json").string(), report.dump(2));
        add_outputs(manifest, out_dir, "ingest", c.id,
                    {c.id + "/events.csv", c.id + "/summary.json",
                     c.id + "/ingest_report.json"});
      }

      stage = "distributions";
      {
        co.dists = distribution_set(co.events, c.id, config.bin_width);
        write_distributions_csv(co.dists, (city_dir / "dist.csv").string());
        add_outputs(manifest, out_dir, "distributions", c.id,
                    {c.id + "/dist.csv"});
      }

      stage = "jsd-matrix";
      {
        std::vector<DayDistribution> day_dists;
        for (int d = 0; d < 7; ++d) {
          day_dists.push_back(co.dists.at({d, config.direction}));
        }
        const JsdMatrix m = jsd_day_matrix(day_dists);
        write_matrix_csv(m, (city_dir / "jsd.csv").string());
        write_text((city_dir / "jsd.json").string(), matrix_to_json(m));
        add_outputs(manifest, out_dir, "jsd-matrix", c.id,
                    {c.id + "/jsd.csv", c.id + "/jsd.json"});
      }

      stage = "rank-fit";
      RankDistribution rank_wd, rank_we;
      {
        rank_wd = rank_stations(co.events, DayClass::weekday);
        rank_we = rank_stations(co.events, DayClass::weekend);
        write_rank_csv(rank_wd, (city_dir / "rank_weekday.csv").string());
        write_rank_csv(rank_we, (city_dir / "rank_weekend.csv").string());
        write_text((city_dir / "fit_weekday.json").string(),
                   rank_fit_to_json(fit_rank_distribution(rank_wd)));
        write_text((city_dir / "fit_weekend.json").string(),
                   rank_fit_to_json(fit_rank_distribution(rank_we)));
        add_outputs(manifest, out_dir, "rank-fit", c.id,
                    {c.id + "/rank_weekday.csv", c.id + "/rank_weekend.csv",
                     c.id + "/fit_weekday.json", c.id + "/fit_weekend.json"});
      }

      stage = "rank-model";
      {
        const RankCorrespondence corr = rank_correspondence(rank_wd, rank_we);
        write_correspondence_csv(corr,
                                 (city_dir / "correspondence.csv").string());
        std::vector<std::string> outs{c.id + "/correspondence.csv"};
        if (!is_london(c.id)) {
          write_text((city_dir / "model.json").string(),
                     rank_model_to_json(fit_rank_model(corr)));
          outs.push_back(c.id + "/model.json");
        }
        add_outputs(manifest, out_dir, "rank-model", c.id, outs);
      }
    }

    stage = "jsd-network";
    city_id.clear();
    {
      std::vector<DayDistribution> all;
      for (const auto& c : config.cities) {
        for (int d = 0; d < 7; ++d) {
          all.push_back(per_city.at(c.id).dists.at({d, config.direction}));
        }
      }
      JsdNetwork net = build_network(all, config.epsilon);
      detect_communities(net, derive_seed(config.seed, "jsd-network"),
                         config.resolution);
      const fs::path net_dir = fs::path(out_dir) / "network";
      fs::create_directories(net_dir);
      write_network_csv(net, config.top_k_edges,
                        (net_dir / "nodes.csv").string(),
                        (net_dir / "edges.csv").string());
      write_text((net_dir / "network.json").string(),
                 network_to_json(net, config.top_k_edges));
      add_outputs(manifest, out_dir, "jsd-network", "all",
                  {"network/nodes.csv", "network/edges.csv",
                   "network/network.json"});
    }
  } catch (const Error& e) {
    manifest["failed_stage"] = stage;
    if (!city_id.empty()) manifest["failed_city"] = city_id;
    write_text((fs::path(out_dir) / "manifest.json").string(),
               manifest.dump(2));
    throw Error(ErrorCode::stage_failure,
                "stage '" + stage + "'" +
                    (city_id.empty() ? "" : " (city " + city_id + ")") +
                    " failed: " + e.what());
  }

  manifest["complete"] = true;
  const std::string text = manifest.dump(2);
  write_text((fs::path(out_dir) / "manifest.json").string(), text);
  return text;
}

namespace {

fs::path resolve_stage_file(const std::string& stage_path,
                            const std::string& default_name) {
  fs::path p(stage_path);
  if (fs::is_directory(p)) p /= default_name;
  if (!fs::exists(p)) {
    throw Error(ErrorCode::invalid_argument, "stage output missing: " + p.string());
  }
  return p;
}

}  // namespace

void emit_plot_data(const std::string& stage_path, const std::string& figure,
                    const std::string& out_csv) {
  std::ofstream out(out_csv);
  if (!out) throw Error(ErrorCode::io, "cannot write " + out_csv);

  if (figure == "fig1") {
    const auto dists =
        read_distributions_csv(resolve_stage_file(stage_path, "dist.csv").string());
    out << "city,day,direction,bin_index,probability\n";
    for (const auto& d : dists) {
      for (std::size_t t = 0; t < d.probs.size(); ++t) {
        csv::write_row(out, {d.city, d.day, direction_name(d.direction),
                             std::to_string(t), format_double(d.probs[t])});
      }
    }
  } else if (figure == "fig2") {
    const auto m =
        read_matrix_csv(resolve_stage_file(stage_path, "jsd.csv").string());
    out << "day_i,day_j,jsd\n";
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
      for (std::size_t j = 0; j < m.labels.size(); ++j) {
        csv::write_row(out, {m.labels[i], m.labels[j],
                             format_double(m.values[i][j])});
      }
    }
  } else if (figure == "fig3") {
    const auto nodes_path = resolve_stage_file(stage_path, "nodes.csv");
    const auto edges_path = resolve_stage_file(stage_path, "edges.csv");
    std::map<std::string, std::string> community;
    {
      csv::Reader r(nodes_path.string());
      std::vector<std::string> row;
      while (r.next(row)) community[row[0]] = row[1];
    }
    csv::Reader r(edges_path.string());
    out << "src,dst,weight,in_top_k,src_community,dst_community\n";
    std::vector<std::string> row;
    while (r.next(row)) {
      csv::write_row(out, {row[0], row[1], row[2], row[3],
                           community.at(row[0]), community.at(row[1])});
    }
  } else if (figure == "fig4") {
    out << "rank,proportion,day_class,fitted_value\n";
    for (const char* cls : {"weekday", "weekend"}) {
      const auto dist = read_rank_csv(
          resolve_stage_file(stage_path, std::string("rank_") + cls + ".csv")
              .string());
      const auto fit = rank_fit_from_json(read_text(
          resolve_stage_file(stage_path, std::string("fit_") + cls + ".json")
              .string()));
      for (const auto& e : dist.entries) {
        csv::write_row(
            out, {std::to_string(e.rank), format_double(e.proportion), cls,
                  format_double(
                      evaluate_rank_model(fit, static_cast<double>(e.rank)))});
      }
    }
  } else if (figure == "fig5") {
    const auto corr = read_correspondence_csv(
        resolve_stage_file(stage_path, "correspondence.csv").string());
    const auto fit = rank_model_from_json(
        read_text(resolve_stage_file(stage_path, "model.json").string()));
    out << "station_id,weekday_rank,weekend_rank,fitted_weekend_rank\n";
    for (const auto& p : corr.pairs) {
      csv::write_row(
          out, {p.station_id, std::to_string(p.weekday_rank),
                std::to_string(p.weekend_rank),
                format_double(model_closed_form(
                    static_cast<double>(p.weekday_rank - 1), fit.a, fit.b,
                    static_cast<double>(fit.m_max)))});
    }
  } else {
    throw Error(ErrorCode::invalid_argument, "unknown figure '" + figure + "'");
  }
}

}  // namespace bss
