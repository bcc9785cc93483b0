#include "divcomb/methods/method.hpp"

#include <cmath>

#include "divcomb/stats/basic.hpp"

namespace divcomb::methods {

ForecastResult MethodForecast::at_level(double level) const {
  for (const Band& band : bands) {
    if (std::abs(band.level - level) < 1e-12) {
      ForecastResult r{method_id, point, band.lower, band.upper, band.level};
      repair_interval(r);
      return r;
    }
  }
  throw Error(ErrorKind::invalid_argument,
              "method '" + method_id + "' has no band at level " + std::to_string(level));
}

bool MethodForecast::all_finite() const noexcept {
  auto finite = [](const std::vector<double>& v) {
    for (double x : v) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  };
  if (!finite(point)) return false;
  for (const Band& b : bands) {
    if (!finite(b.lower) || !finite(b.upper)) return false;
    if (b.lower.size() != point.size() || b.upper.size() != point.size()) return false;
  }
  return true;
}

std::vector<Band> gaussian_bands(std::span<const double> point, std::span<const double> sd,
                                 std::span<const double> levels) {
  std::vector<Band> bands;
  bands.reserve(levels.size());
  for (double level : levels) {
    const double z = stats::normal_two_sided_z(level);
    Band band{level, {}, {}};
    band.lower.resize(point.size());
    band.upper.resize(point.size());
    for (std::size_t h = 0; h < point.size(); ++h) {
      band.lower[h] = point[h] - z * sd[h];
      band.upper[h] = point[h] + z * sd[h];
    }
    bands.push_back(std::move(band));
  }
  return bands;
}

double sorted_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) return std::nan("");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace divcomb::methods
