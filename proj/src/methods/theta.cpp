#include "divcomb/methods/theta.hpp"

#include <algorithm>
#include <cmath>

#include "divcomb/methods/simple.hpp"
#include "divcomb/stats/basic.hpp"
#include "divcomb/stats/optim.hpp"
#include "divcomb/stats/seasonal.hpp"

namespace divcomb::methods {

namespace {

double ses_sse(std::span<const double> y, double alpha, double level, double* final_level) {
  double sse = 0.0;
  for (double v : y) {
    const double e = v - level;
    sse += e * e;
    level += alpha * e;
  }
  if (final_level != nullptr) *final_level = level;
  return sse;
}

}  // namespace

SesFit fit_ses(std::span<const double> y) {
  const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
  const double range = *hi_it - *lo_it;
  const double lower[] = {1e-4, *lo_it - range};
  const double upper[] = {0.9999, *hi_it + range};
  stats::NelderMeadOptions options;
  options.restarts = 3;
  options.tolerance = 1e-8;
  auto objective = [&](std::span<const double> p) { return ses_sse(y, p[0], p[1], nullptr); };
  auto result = stats::nelder_mead(objective, {0.5, y.front()}, lower, upper, options);
  if (!std::isfinite(result.value)) {
    throw Error(ErrorKind::method_failure, "SES optimization failed");
  }
  SesFit fit;
  fit.alpha = result.x[0];
  fit.initial_level = result.x[1];
  fit.sse = ses_sse(y, fit.alpha, fit.initial_level, &fit.final_level);
  return fit;
}

MethodForecast theta(const TimeSeries& train, int horizon, const MethodContext& ctx) {
  const auto y = train.values();
  const std::size_t n = y.size();
  const int m = train.period();
  if (n < 3) throw Error(ErrorKind::series_too_short, "theta needs T >= 3");

  std::vector<double> figure;
  if (stats::seasonality_test(y, m)) {
    figure = stats::multiplicative_seasonal_figure(y, m);
    if (std::any_of(figure.begin(), figure.end(), [](double s) { return !(s > 0.0); })) {
      figure.clear();
    }
  }
  std::vector<double> adjusted(y.begin(), y.end());
  if (!figure.empty()) {
    for (std::size_t t = 0; t < n; ++t) adjusted[t] /= stats::seasonal_index(figure, t);
  }

  SesFit ses;
  try {
    ses = fit_ses(adjusted);
  } catch (const Error&) {
    MethodForecast fallback = naive(train, horizon, ctx);
    fallback.method_id = "theta";
    return fallback;
  }
  const double slope = stats::linear_trend(adjusted).slope;
  const double alpha = ses.alpha;
  const double damping = (1.0 - std::pow(1.0 - alpha, static_cast<double>(n))) / alpha;
  const double dof = std::max<double>(1.0, static_cast<double>(n) - 2.0);
  const double sigma = std::sqrt(ses.sse / dof);

  const auto hc = static_cast<std::size_t>(horizon);
  MethodForecast out;
  out.method_id = "theta";
  out.fitted_by = "theta";
  out.point.resize(hc);
  std::vector<double> sd(hc);
  for (std::size_t h = 0; h < hc; ++h) {
    out.point[h] = ses.final_level + 0.5 * slope * (static_cast<double>(h) + damping);
    sd[h] = sigma * std::sqrt(1.0 + static_cast<double>(h) * alpha * alpha);
  }
  out.bands = gaussian_bands(out.point, sd, ctx.levels);
  if (!figure.empty()) {
    for (std::size_t h = 0; h < hc; ++h) {
      const double s = stats::seasonal_index(figure, n + h);
      out.point[h] *= s;
      for (Band& b : out.bands) {
        b.lower[h] *= s;
        b.upper[h] *= s;
      }
    }
  }
  return out;
}

ForecastResult forecast_theta(const TimeSeries& train, int horizon, double level) {
  return theta(train, horizon, MethodContext{{level}, 0}).at_level(level);
}

}  // namespace divcomb::methods
