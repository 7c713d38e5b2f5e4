#pragma once

#include <span>
#include <string>
#include <vector>

#include "bss/timeseries.hpp"

namespace bss {

// Kullback-Leibler divergence in bits. Requires q_i > 0 wherever p_i > 0;
// a support violation is an error, never infinity.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// Jensen-Shannon divergence against the pairwise mean, log base 2, in [0, 1].
double js_divergence(std::span<const double> p, std::span<const double> q);

// Brace-list convenience, mostly for tests and examples.
inline std::span<const double> as_span(std::initializer_list<double> v) {
  return {v.begin(), v.size()};
}
inline double kl_divergence(std::initializer_list<double> p,
                            std::span<const double> q) {
  return kl_divergence(as_span(p), q);
}
inline double kl_divergence(std::span<const double> p,
                            std::initializer_list<double> q) {
  return kl_divergence(p, as_span(q));
}
inline double kl_divergence(std::initializer_list<double> p,
                            std::initializer_list<double> q) {
  return kl_divergence(as_span(p), as_span(q));
}
inline double js_divergence(std::initializer_list<double> p,
                            std::span<const double> q) {
  return js_divergence(as_span(p), q);
}
inline double js_divergence(std::span<const double> p,
                            std::initializer_list<double> q) {
  return js_divergence(p, as_span(q));
}
inline double js_divergence(std::initializer_list<double> p,
                            std::initializer_list<double> q) {
  return js_divergence(as_span(p), as_span(q));
}

struct JsdMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> values;  // symmetric, zero diagonal
};

// 7x7 Mon..Sun matrix for one city. Every distribution must be non-empty.
JsdMatrix jsd_day_matrix(const std::vector<DayDistribution>& dists);

void write_matrix_csv(const JsdMatrix& m, const std::string& path);
std::string matrix_to_json(const JsdMatrix& m);
JsdMatrix read_matrix_csv(const std::string& path);

}  // namespace bss
