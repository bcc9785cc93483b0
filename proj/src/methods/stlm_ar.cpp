#include "divcomb/methods/stlm_ar.hpp"

#include <cmath>
#include <limits>

#include "divcomb/methods/ets.hpp"
#include "divcomb/stats/basic.hpp"
#include "divcomb/stats/seasonal.hpp"

namespace divcomb::methods {

ArFit fit_ar_yule_walker(std::span<const double> x, int max_order) {
  const auto n = static_cast<int>(x.size());
  if (n < 2) throw Error(ErrorKind::series_too_short, "AR fit needs at least two values");
  if (max_order < 0) {
    max_order = std::min(n - 1, static_cast<int>(std::floor(10.0 * std::log10(n))));
  }
  max_order = std::max(0, std::min(max_order, n - 1));

  ArFit fit;
  fit.mean = stats::mean(x);
  const auto gamma = stats::autocovariance(x, max_order);
  fit.aic.assign(static_cast<std::size_t>(max_order) + 1, std::numeric_limits<double>::infinity());
  if (gamma[0] <= 0.0) {
    // Constant input: white noise with zero variance.
    fit.aic[0] = 0.0;
    return fit;
  }

  // Levinson-Durbin recursion keeping every order's coefficients.
  std::vector<std::vector<double>> coefs(static_cast<std::size_t>(max_order) + 1);
  std::vector<double> variances(static_cast<std::size_t>(max_order) + 1);
  variances[0] = gamma[0];
  for (int k = 1; k <= max_order; ++k) {
    const auto& prev = coefs[static_cast<std::size_t>(k - 1)];
    double num = gamma[static_cast<std::size_t>(k)];
    for (int j = 1; j < k; ++j) num -= prev[static_cast<std::size_t>(j - 1)] * gamma[static_cast<std::size_t>(k - j)];
    const double reflection = num / variances[static_cast<std::size_t>(k - 1)];
    std::vector<double> cur(static_cast<std::size_t>(k));
    for (int j = 1; j < k; ++j) {
      cur[static_cast<std::size_t>(j - 1)] =
          prev[static_cast<std::size_t>(j - 1)] - reflection * prev[static_cast<std::size_t>(k - j - 1)];
    }
    cur[static_cast<std::size_t>(k - 1)] = reflection;
    coefs[static_cast<std::size_t>(k)] = std::move(cur);
    variances[static_cast<std::size_t>(k)] =
        variances[static_cast<std::size_t>(k - 1)] * (1.0 - reflection * reflection);
    if (variances[static_cast<std::size_t>(k)] <= 0.0) {
      max_order = k - 1;
      break;
    }
  }

  int best = 0;
  for (int k = 0; k <= max_order; ++k) {
    const double aic = n * std::log(variances[static_cast<std::size_t>(k)]) + 2.0 * k;
    fit.aic[static_cast<std::size_t>(k)] = aic;
    if (aic < fit.aic[static_cast<std::size_t>(best)]) best = k;
  }
  fit.order = best;
  fit.coefficients = coefs[static_cast<std::size_t>(best)];
  fit.prediction_variance =
      variances[static_cast<std::size_t>(best)] * n / std::max(1.0, n - (best + 1.0));
  return fit;
}

void ar_forecast(const ArFit& fit, std::span<const double> x, int horizon,
                 std::vector<double>& point, std::vector<double>& sd) {
  const auto p = static_cast<std::size_t>(fit.order);
  const auto hc = static_cast<std::size_t>(horizon);
  std::vector<double> path(x.begin(), x.end());
  for (double& v : path) v -= fit.mean;
  point.assign(hc, 0.0);
  for (std::size_t h = 0; h < hc; ++h) {
    double v = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      if (path.size() >= i + 1) v += fit.coefficients[i] * path[path.size() - 1 - i];
    }
    path.push_back(v);
    point[h] = v + fit.mean;
  }
  std::vector<double> psi(hc, 0.0);
  psi[0] = 1.0;
  for (std::size_t j = 1; j < hc; ++j) {
    for (std::size_t i = 1; i <= std::min(j, p); ++i) psi[j] += fit.coefficients[i - 1] * psi[j - i];
  }
  sd.assign(hc, 0.0);
  double cum = 0.0;
  for (std::size_t h = 0; h < hc; ++h) {
    cum += psi[h] * psi[h];
    sd[h] = std::sqrt(fit.prediction_variance * cum);
  }
}

MethodForecast stlm_ar(const TimeSeries& train, int horizon, const MethodContext& ctx) {
  const int m = train.period();
  const auto y = train.values();
  const std::size_t n = y.size();
  if (m <= 1 || n < 2 * static_cast<std::size_t>(m) + 1) {
    MethodForecast out = ets(train, horizon, ctx);
    out.method_id = "stlm_ar";
    return out;
  }
  const auto dec = stats::stl(y, m);
  std::vector<double> adjusted(n);
  for (std::size_t t = 0; t < n; ++t) adjusted[t] = y[t] - dec.seasonal[t];

  const ArFit fit = fit_ar_yule_walker(adjusted);
  std::vector<double> point;
  std::vector<double> sd;
  ar_forecast(fit, adjusted, horizon, point, sd);
  const auto period = static_cast<std::size_t>(m);
  for (std::size_t h = 0; h < point.size(); ++h) {
    point[h] += dec.seasonal[n - period + h % period];
  }
  MethodForecast out;
  out.method_id = "stlm_ar";
  out.fitted_by = "stlm_ar";
  out.point = std::move(point);
  out.bands = gaussian_bands(out.point, sd, ctx.levels);
  return out;
}

ForecastResult forecast_stlm_ar(const TimeSeries& train, int horizon, double level) {
  return stlm_ar(train, horizon, MethodContext{{level}, 0}).at_level(level);
}

}  // namespace divcomb::methods
