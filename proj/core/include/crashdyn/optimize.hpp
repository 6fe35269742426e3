#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace crashdyn {

struct NelderMeadOptions {
  /// Relative spread of objective values across the simplex at convergence.
  double tol = 1e-10;
  std::size_t max_iter = 10000;
  /// Initial simplex edge along coordinate i is initial_step * |x_i|, or
  /// zero_step when x_i == 0.
  double initial_step = 0.05;
  double zero_step = 0.00025;
  /// Re-seeds the simplex around the incumbent after a collapse; a restart
  /// that yields no relative improvement above tol ends the search.
  std::size_t max_restarts = 3;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  double initial_value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Deterministic downhill simplex minimization. Non-finite objective values
/// are treated as +inf, so infeasible regions can be encoded in the objective.
NelderMeadResult nelder_mead(const Objective& objective, std::span<const double> init,
                             const NelderMeadOptions& options = {});

}  // namespace crashdyn
