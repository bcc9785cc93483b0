#pragma once

#include "divcomb/methods/method.hpp"

namespace divcomb::methods {

// Benchmarks with closed-form Gaussian intervals. sigma is the sample
// standard deviation of the one-step residuals of each model.

/// Last value repeated; sd_h = sigma * sqrt(h).
MethodForecast naive(const TimeSeries& train, int horizon, const MethodContext& ctx);
/// Value one season back repeated; sd_h = sigma * sqrt(completed cycles).
/// Falls back to naive when m = 1 or T < m.
MethodForecast seasonal_naive(const TimeSeries& train, int horizon, const MethodContext& ctx);
/// Random walk with drift; sd_h = sigma * sqrt(h (1 + h / (T - 1))).
/// Throws Error(series_too_short) when T < 2.
MethodForecast rw_drift(const TimeSeries& train, int horizon, const MethodContext& ctx);

ForecastResult forecast_naive(const TimeSeries& train, int horizon, double level);
ForecastResult forecast_snaive(const TimeSeries& train, int horizon, double level);
ForecastResult forecast_rw_drift(const TimeSeries& train, int horizon, double level);

/// Shared helper: naive on an arbitrary vector (used by naive2 and theta).
MethodForecast naive_on(std::span<const double> values, int horizon,
                        std::span<const double> levels);

}  // namespace divcomb::methods
