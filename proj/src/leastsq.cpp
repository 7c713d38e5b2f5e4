#include "bss/leastsq.hpp"

#include <algorithm>
#include <cmath>

#include "bss/error.hpp"

namespace bss {

namespace {

// Gaussian elimination with partial pivoting; a is n x n row-major,
// solves a x = b in place. Returns false on a (near-)singular system.
bool solve_linear(std::vector<double> a, std::vector<double> b, int n,
                  std::vector<double>& x) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    }
    if (std::abs(a[pivot * n + col]) < 1e-300) return false;
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * x[c];
    x[r] = s / a[r * n + r];
  }
  return true;
}

double sse_of(const std::vector<double>& r) {
  double s = 0;
  for (double v : r) s += v * v;
  return s;
}

}  // namespace

LmResult levenberg_marquardt(std::vector<double> initial, int n_residuals,
                             const ResidualFn& fn, const LmOptions& opts) {
  const int np = static_cast<int>(initial.size());
  const bool boxed = !opts.lower.empty();
  auto clamp_box = [&](std::vector<double>& v) {
    if (!boxed) return;
    for (int a = 0; a < np; ++a) v[a] = std::clamp(v[a], opts.lower[a], opts.upper[a]);
  };
  clamp_box(initial);

  std::vector<double> p = initial;
  std::vector<double> r(n_residuals), jac(n_residuals * np);
  fn(p, r, jac);
  double sse = sse_of(r);

  double lambda = opts.initial_lambda;
  LmResult result;
  result.params = p;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    result.iterations = iter + 1;

    // normal equations: (JtJ + lambda * diag(JtJ)) delta = -Jt r
    std::vector<double> jtj(np * np, 0.0), jtr(np, 0.0);
    for (int k = 0; k < n_residuals; ++k) {
      for (int a = 0; a < np; ++a) {
        jtr[a] -= jac[k * np + a] * r[k];
        for (int b = a; b < np; ++b) {
          jtj[a * np + b] += jac[k * np + a] * jac[k * np + b];
        }
      }
    }
    for (int a = 0; a < np; ++a) {
      for (int b = 0; b < a; ++b) jtj[a * np + b] = jtj[b * np + a];
    }

    // freeze parameters pinned at a bound with the descent direction
    // pointing outside the box
    if (boxed) {
      for (int a = 0; a < np; ++a) {
        const bool at_lower = p[a] <= opts.lower[a] && jtr[a] < 0;
        const bool at_upper = p[a] >= opts.upper[a] && jtr[a] > 0;
        if (at_lower || at_upper) {
          for (int b = 0; b < np; ++b) {
            jtj[a * np + b] = 0.0;
            jtj[b * np + a] = 0.0;
          }
          jtj[a * np + a] = 1.0;
          jtr[a] = 0.0;
        }
      }
    }

    bool accepted = false;
    double max_rel_change = 0;
    const double sse_before = sse;
    for (int attempt = 0; attempt < 30 && !accepted; ++attempt) {
      std::vector<double> damped = jtj;
      for (int a = 0; a < np; ++a) {
        damped[a * np + a] += lambda * (jtj[a * np + a] > 0 ? jtj[a * np + a] : 1.0);
      }
      std::vector<double> delta;
      if (!solve_linear(damped, jtr, np, delta)) {
        lambda *= 10;
        continue;
      }
      std::vector<double> trial = p;
      for (int a = 0; a < np; ++a) trial[a] += delta[a];
      clamp_box(trial);

      std::vector<double> r_trial(n_residuals), jac_trial(n_residuals * np);
      fn(trial, r_trial, jac_trial);
      const double sse_trial = sse_of(r_trial);
      if (std::isfinite(sse_trial) && sse_trial <= sse) {
        max_rel_change = 0;
        for (int a = 0; a < np; ++a) {
          const double denom = std::max(std::abs(p[a]), 1e-12);
          max_rel_change = std::max(max_rel_change,
                                    std::abs(trial[a] - p[a]) / denom);
        }
        p = std::move(trial);
        r = std::move(r_trial);
        jac = std::move(jac_trial);
        sse = sse_trial;
        lambda = std::max(lambda * 0.3, 1e-12);
        accepted = true;
      } else {
        lambda *= 10;
      }
    }

    result.params = p;
    if (accepted && max_rel_change < opts.rel_change_tol) {
      result.converged = true;
      break;
    }
    if (accepted &&
        sse_before - sse < opts.rel_change_tol * std::max(sse_before, 1e-30)) {
      // objective has flattened out even if parameters still drift
      result.converged = true;
      break;
    }
    if (!accepted) {
      // cannot improve further in any damping direction
      result.converged = true;
      break;
    }
  }

  result.rmse = std::sqrt(sse / n_residuals);
  return result;
}

}  // namespace bss
