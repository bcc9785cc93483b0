#pragma once

#include "divcomb/methods/method.hpp"

namespace divcomb::methods {

struct SesFit {
  double alpha = 0.5;
  double initial_level = 0.0;
  double final_level = 0.0;
  double sse = 0.0;
};

/// Simple exponential smoothing with alpha in [1e-4, 0.9999] and the initial
/// level estimated jointly by minimizing the one-step SSE (Nelder-Mead, 3
/// restarts).
SesFit fit_ses(std::span<const double> y);

/// Theta method in its SES-with-drift form: SES level plus half the OLS
/// slope, h - 1 + (1 - (1 - alpha)^n) / alpha steps ahead. Multiplicative
/// classical deseasonalization when the seasonality test fires.
MethodForecast theta(const TimeSeries& train, int horizon, const MethodContext& ctx);

ForecastResult forecast_theta(const TimeSeries& train, int horizon, double level);

}  // namespace divcomb::methods
