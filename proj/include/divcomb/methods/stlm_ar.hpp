#pragma once

#include <vector>

#include "divcomb/methods/method.hpp"

namespace divcomb::methods {

/// Autoregression fitted by Yule-Walker (Levinson-Durbin), order by AIC.
struct ArFit {
  int order = 0;
  double mean = 0.0;
  std::vector<double> coefficients;
  /// One-step prediction variance, inflated by n / (n - order - 1).
  double prediction_variance = 0.0;
  std::vector<double> aic;  // per candidate order 0..max
};

/// max_order < 0 selects min(n - 1, floor(10 log10 n)).
ArFit fit_ar_yule_walker(std::span<const double> x, int max_order = -1);

/// Point forecasts and psi-weight standard deviations.
void ar_forecast(const ArFit& fit, std::span<const double> x, int horizon,
                 std::vector<double>& point, std::vector<double>& sd);

/// STL decomposition; AR on the seasonally adjusted series; seasonal naive
/// on the seasonal component. Falls back to ets when m = 1 or T < 2m + 1.
MethodForecast stlm_ar(const TimeSeries& train, int horizon, const MethodContext& ctx);

ForecastResult forecast_stlm_ar(const TimeSeries& train, int horizon, double level);

}  // namespace divcomb::methods
