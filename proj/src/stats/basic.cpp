#include "divcomb/stats/basic.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numeric>

#include "divcomb/core/error.hpp"

namespace divcomb::stats {

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double mu = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - mu) * (v - mu);
  return ss / static_cast<double>(x.size() - 1);
}

double stddev(std::span<const double> x) { return std::sqrt(variance(x)); }

std::vector<double> autocovariance(std::span<const double> x, int max_lag) {
  const auto n = x.size();
  const double mu = mean(x);
  std::vector<double> out(static_cast<std::size_t>(max_lag) + 1, 0.0);
  for (int k = 0; k <= max_lag && static_cast<std::size_t>(k) < n; ++k) {
    double s = 0.0;
    for (std::size_t t = static_cast<std::size_t>(k); t < n; ++t) {
      s += (x[t] - mu) * (x[t - static_cast<std::size_t>(k)] - mu);
    }
    out[static_cast<std::size_t>(k)] = s / static_cast<double>(n);
  }
  return out;
}

std::vector<double> acf(std::span<const double> x, int max_lag) {
  auto gamma = autocovariance(x, max_lag);
  std::vector<double> out(static_cast<std::size_t>(max_lag), 0.0);
  if (gamma[0] <= 0.0) return out;
  for (int k = 1; k <= max_lag; ++k) {
    out[static_cast<std::size_t>(k - 1)] = gamma[static_cast<std::size_t>(k)] / gamma[0];
  }
  return out;
}

std::vector<double> difference(std::span<const double> x, int lag) {
  std::vector<double> out;
  const auto l = static_cast<std::size_t>(lag);
  if (x.size() <= l) return out;
  out.reserve(x.size() - l);
  for (std::size_t t = l; t < x.size(); ++t) out.push_back(x[t] - x[t - l]);
  return out;
}

LinearFit linear_trend(std::span<const double> x) {
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2) return {x.empty() ? 0.0 : x[0], 0.0};
  const double t_mean = (n + 1.0) / 2.0;
  const double x_mean = mean(x);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dt = static_cast<double>(i + 1) - t_mean;
    sxy += dt * (x[i] - x_mean);
    sxx += dt * dt;
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = x_mean - fit.slope * t_mean;
  return fit;
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double normal_cdf(double x) {
  return boost::math::cdf(boost::math::normal_distribution<double>(), x);
}

double normal_two_sided_z(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "confidence level must lie in (0, 1)");
  }
  return normal_quantile(0.5 + level / 2.0);
}

}  // namespace divcomb::stats
