#pragma once

#include <functional>
#include <span>
#include <vector>

namespace divcomb::stats {

struct NelderMeadOptions {
  int max_evaluations = 2000;
  /// Relative tolerance on the spread of simplex values.
  double tolerance = 1e-8;
  /// Additional restarts from the best vertex after convergence.
  int restarts = 3;
  /// Initial simplex edge, as a fraction of the box width (or of |x| when a
  /// coordinate is unbounded).
  double initial_step = 0.1;
};

struct OptimResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Box-constrained Nelder-Mead: vertices are projected into [lower, upper].
/// Non-finite objective values are treated as +inf. Deterministic.
OptimResult nelder_mead(const Objective& f, std::vector<double> x0,
                        std::span<const double> lower, std::span<const double> upper,
                        const NelderMeadOptions& options = {});

/// Golden-section minimization of a scalar function on [a, b].
double golden_section(const std::function<double(double)>& f, double a, double b,
                      double tolerance = 1e-6);

}  // namespace divcomb::stats
