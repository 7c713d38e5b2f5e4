#include "bss/divergence.hpp"

#include <cmath>
#include <fstream>

#include "bss/csv.hpp"
#include "bss/error.hpp"
#include "bss/num_format.hpp"
#include "json.hpp"

namespace bss {

namespace {

constexpr double kNormTol = 1e-9;

void check_pair(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::invalid_argument, "length mismatch");
  }
  double sp = 0, sq = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0 || q[i] < 0) {
      throw Error(ErrorCode::invalid_argument, "negative probability");
    }
    sp += p[i];
    sq += q[i];
  }
  if (std::abs(sp - 1.0) > kNormTol || std::abs(sq - 1.0) > kNormTol) {
    throw Error(ErrorCode::invalid_argument, "input not normalized");
  }
}

}  // namespace

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  check_pair(p, q);
  double sum = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0) continue;  // 0 * log(0/q) := 0
    if (q[i] == 0) {
      throw Error(ErrorCode::invalid_argument,
                  "support violation: p[" + std::to_string(i) + "] > 0, q = 0");
    }
    sum += p[i] * std::log2(p[i] / q[i]);
  }
  return sum < 0 ? 0.0 : sum;  // clip float dust from near-identical inputs
}

double js_divergence(std::span<const double> p, std::span<const double> q) {
  check_pair(p, q);
  // Inlined so each unordered pair is evaluated once and symmetrically.
  double sum = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    // both contributions join before accumulating, so swapping p and q
    // produces the bit-identical result
    double t = 0;
    if (p[i] > 0) t += p[i] * std::log2(p[i] / m);
    if (q[i] > 0) t += q[i] * std::log2(q[i] / m);
    sum += 0.5 * t;
  }
  if (sum < 0) return 0.0;
  return sum > 1.0 ? 1.0 : sum;
}

JsdMatrix jsd_day_matrix(const std::vector<DayDistribution>& dists) {
  JsdMatrix m;
  const std::size_t n = dists.size();
  for (const auto& d : dists) {
    if (d.empty()) {
      throw Error(ErrorCode::invalid_argument,
                  "empty distribution '" + d.day + "' in JSD matrix input");
    }
    if (d.bin_width != dists.front().bin_width) {
      throw Error(ErrorCode::invalid_argument, "bin_width mismatch");
    }
    m.labels.push_back(d.day);
  }
  m.values.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = js_divergence(dists[i].probs, dists[j].probs);
      m.values[i][j] = v;
      m.values[j][i] = v;
    }
  }
  return m;
}

void write_matrix_csv(const JsdMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  std::vector<std::string> header{"label"};
  header.insert(header.end(), m.labels.begin(), m.labels.end());
  csv::write_row(out, header);
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    std::vector<std::string> row{m.labels[i]};
    for (double v : m.values[i]) row.push_back(format_double(v));
    csv::write_row(out, row);
  }
}

std::string matrix_to_json(const JsdMatrix& m) {
  nlohmann::json j;
  j["labels"] = m.labels;
  j["values"] = m.values;
  return j.dump(2);
}

JsdMatrix read_matrix_csv(const std::string& path) {
  csv::Reader reader(path);
  JsdMatrix m;
  const auto& header = reader.header();
  if (header.empty() || header[0] != "label") {
    throw Error(ErrorCode::parse, path + ": not a matrix CSV");
  }
  m.labels.assign(header.begin() + 1, header.end());
  std::vector<std::string> row;
  while (reader.next(row)) {
    if (row.size() != header.size()) {
      throw Error(ErrorCode::parse, path + ": ragged matrix row");
    }
    std::vector<double> vals;
    for (std::size_t i = 1; i < row.size(); ++i) vals.push_back(std::stod(row[i]));
    m.values.push_back(std::move(vals));
  }
  if (m.values.size() != m.labels.size()) {
    throw Error(ErrorCode::parse, path + ": matrix not square");
  }
  return m;
}

}  // namespace bss
