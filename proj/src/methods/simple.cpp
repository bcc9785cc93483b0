#include "divcomb/methods/simple.hpp"

#include <cmath>

#include "divcomb/stats/basic.hpp"

namespace divcomb::methods {

namespace {

ForecastResult single(const MethodForecast& f, double level) { return f.at_level(level); }

MethodContext at(double level) { return MethodContext{{level}, 0}; }

}  // namespace

MethodForecast naive_on(std::span<const double> values, int horizon,
                        std::span<const double> levels) {
  if (values.empty()) {
    throw Error(ErrorKind::series_too_short, "naive needs at least one observation");
  }
  const auto h_count = static_cast<std::size_t>(horizon);
  const auto residuals = stats::difference(values, 1);
  const double sigma = stats::stddev(residuals);
  MethodForecast out;
  out.method_id = "naive";
  out.fitted_by = "naive";
  out.point.assign(h_count, values.back());
  std::vector<double> sd(h_count);
  for (std::size_t h = 0; h < h_count; ++h) sd[h] = sigma * std::sqrt(static_cast<double>(h + 1));
  out.bands = gaussian_bands(out.point, sd, levels);
  return out;
}

MethodForecast naive(const TimeSeries& train, int horizon, const MethodContext& ctx) {
  return naive_on(train.values(), horizon, ctx.levels);
}

MethodForecast seasonal_naive(const TimeSeries& train, int horizon, const MethodContext& ctx) {
  const int m = train.period();
  const auto y = train.values();
  if (m <= 1 || y.size() < static_cast<std::size_t>(m)) {
    MethodForecast out = naive(train, horizon, ctx);
    out.method_id = "snaive";
    return out;
  }
  const auto residuals = stats::difference(y, m);
  const double sigma = stats::stddev(residuals);
  const std::size_t n = y.size();
  MethodForecast out;
  out.method_id = "snaive";
  out.fitted_by = "snaive";
  out.point.resize(static_cast<std::size_t>(horizon));
  std::vector<double> sd(static_cast<std::size_t>(horizon));
  for (int h = 1; h <= horizon; ++h) {
    const int cycles = (h - 1) / m + 1;
    // y_{T + h - m * ceil(h / m)} in 1-based indexing.
    const std::size_t index = n + static_cast<std::size_t>(h) - static_cast<std::size_t>(m * cycles);
    out.point[static_cast<std::size_t>(h - 1)] = y[index - 1];
    sd[static_cast<std::size_t>(h - 1)] = sigma * std::sqrt(static_cast<double>(cycles));
  }
  out.bands = gaussian_bands(out.point, sd, ctx.levels);
  return out;
}

MethodForecast rw_drift(const TimeSeries& train, int horizon, const MethodContext& ctx) {
  const auto y = train.values();
  const std::size_t n = y.size();
  if (n < 2) throw Error(ErrorKind::series_too_short, "random walk with drift needs T >= 2");
  const double drift = (y.back() - y.front()) / static_cast<double>(n - 1);
  std::vector<double> residuals = stats::difference(y, 1);
  for (double& r : residuals) r -= drift;
  const double sigma = stats::stddev(residuals);
  MethodForecast out;
  out.method_id = "rw_drift";
  out.fitted_by = "rw_drift";
  out.point.resize(static_cast<std::size_t>(horizon));
  std::vector<double> sd(static_cast<std::size_t>(horizon));
  for (int h = 1; h <= horizon; ++h) {
    const double hh = static_cast<double>(h);
    out.point[static_cast<std::size_t>(h - 1)] = y.back() + hh * drift;
    sd[static_cast<std::size_t>(h - 1)] =
        sigma * std::sqrt(hh * (1.0 + hh / static_cast<double>(n - 1)));
  }
  out.bands = gaussian_bands(out.point, sd, ctx.levels);
  return out;
}

ForecastResult forecast_naive(const TimeSeries& train, int horizon, double level) {
  return single(naive(train, horizon, at(level)), level);
}

ForecastResult forecast_snaive(const TimeSeries& train, int horizon, double level) {
  return single(seasonal_naive(train, horizon, at(level)), level);
}

ForecastResult forecast_rw_drift(const TimeSeries& train, int horizon, double level) {
  return single(rw_drift(train, horizon, at(level)), level);
}

}  // namespace divcomb::methods
