#pragma once

#include <functional>
#include <vector>

namespace bss {

struct LmOptions {
  int max_iterations = 500;
  double rel_change_tol = 1e-8;
  double initial_lambda = 1e-3;
  // Optional per-parameter box; empty means unbounded. A parameter resting
  // on a bound with its gradient pointing outward is frozen for that step,
  // so a pinned parameter cannot distort the others.
  std::vector<double> lower;
  std::vector<double> upper;
};

struct LmResult {
  std::vector<double> params;
  double rmse = 0;
  bool converged = false;
  int iterations = 0;
};

// Fills residuals (length m) and the row-major m x n Jacobian at `params`.
using ResidualFn = std::function<void(const std::vector<double>& params,
                                      std::vector<double>& residuals,
                                      std::vector<double>& jacobian)>;

// Damped Gauss-Newton (Levenberg-Marquardt) minimizing the residual sum
// of squares. Converges when the largest relative parameter change or the
// relative objective improvement drops below rel_change_tol; otherwise
// stops at max_iterations with converged = false and the best parameters
// seen.
LmResult levenberg_marquardt(std::vector<double> initial, int n_residuals,
                             const ResidualFn& fn, const LmOptions& opts = {});

}  // namespace bss
