#pragma once

#include <span>
#include <vector>

namespace divcomb::stats {

double mean(std::span<const double> x);
/// Sample variance with n-1 denominator; 0 for fewer than two values.
double variance(std::span<const double> x);
double stddev(std::span<const double> x);

/// Autocorrelations at lags 1..max_lag (biased estimator, as in R's acf).
std::vector<double> acf(std::span<const double> x, int max_lag);
/// Autocovariances at lags 0..max_lag with denominator n.
std::vector<double> autocovariance(std::span<const double> x, int max_lag);

/// x_t - x_{t-lag} for t = lag..n-1.
std::vector<double> difference(std::span<const double> x, int lag = 1);

struct LinearFit {
  double intercept = 0.0;  // value at t = 0
  double slope = 0.0;
};
/// OLS of x_t on t = 1..n.
LinearFit linear_trend(std::span<const double> x);

/// Two-sided standard normal quantile z with P(|Z| <= z) = level.
double normal_two_sided_z(double level);
double normal_quantile(double p);
double normal_cdf(double x);

}  // namespace divcomb::stats
