#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "divcomb/core/types.hpp"

namespace divcomb::methods {

/// Prediction interval bounds at one confidence level.
struct Band {
  double level = 0.95;
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Output of one method for one series: a point path plus one band per
/// requested level (same order as MethodContext::levels).
struct MethodForecast {
  std::string method_id;  // the method that was asked for
  std::string fitted_by;  // the method that produced the numbers (after fallbacks)
  std::vector<double> point;
  std::vector<Band> bands;

  /// Repaired single-level view. Throws when the level was not requested.
  ForecastResult at_level(double level) const;
  bool all_finite() const noexcept;
};

struct MethodContext {
  std::vector<double> levels{0.95};
  /// Seed for stochastic subroutines (simulated intervals).
  std::uint64_t seed = 0;
};

/// Bands point[h] +/- z(level) * sd[h] for every level.
std::vector<Band> gaussian_bands(std::span<const double> point, std::span<const double> sd,
                                 std::span<const double> levels);

/// Empirical quantile (type 7, linear interpolation) of a sorted sample.
double sorted_quantile(std::span<const double> sorted, double p);

}  // namespace divcomb::methods
