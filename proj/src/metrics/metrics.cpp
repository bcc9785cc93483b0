#include "divcomb/metrics/metrics.hpp"

#include <fmt/format.h>

#include <cmath>
#include <ostream>

#include "divcomb/methods/method.hpp"
#include "divcomb/methods/simple.hpp"
#include "divcomb/stats/seasonal.hpp"

namespace divcomb::metrics {

double scale_denominator(std::span<const double> train, int m) {
  const auto lag = static_cast<std::size_t>(std::max(1, m));
  if (train.size() <= lag) {
    throw Error(ErrorKind::degenerate_scale, "training series not longer than the seasonal lag");
  }
  double s = 0.0;
  for (std::size_t t = lag; t < train.size(); ++t) s += std::abs(train[t] - train[t - lag]);
  s /= static_cast<double>(train.size() - lag);
  if (!(s > 0.0)) throw Error(ErrorKind::degenerate_scale, "in-sample seasonal naive MAE is zero");
  return s;
}

double mase(std::span<const double> train, std::span<const double> actuals,
            std::span<const double> point, int m) {
  if (actuals.size() != point.size() || actuals.empty()) {
    throw Error(ErrorKind::length_mismatch, "actuals and forecasts differ in length");
  }
  const double scale = scale_denominator(train, m);
  double s = 0.0;
  for (std::size_t h = 0; h < actuals.size(); ++h) s += std::abs(actuals[h] - point[h]);
  return s / static_cast<double>(actuals.size()) / scale;
}

double msis(std::span<const double> train, std::span<const double> actuals,
            std::span<const double> lower, std::span<const double> upper, int m, double alpha) {
  if (actuals.size() != lower.size() || actuals.size() != upper.size() || actuals.empty()) {
    throw Error(ErrorKind::length_mismatch, "actuals and bounds differ in length");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::invalid_argument, "alpha outside (0,1)");
  const double scale = scale_denominator(train, m);
  double s = 0.0;
  for (std::size_t h = 0; h < actuals.size(); ++h) {
    const double y = actuals[h];
    s += upper[h] - lower[h];
    if (y < lower[h]) s += 2.0 / alpha * (lower[h] - y);
    if (y > upper[h]) s += 2.0 / alpha * (y - upper[h]);
  }
  return s / static_cast<double>(actuals.size()) / scale;
}

bool seasonality_test(std::span<const double> train, int m) {
  return stats::seasonality_test(train, m);
}

ForecastResult naive2_forecast(std::span<const double> train, int horizon, int m, double level) {
  const std::vector<double> levels{level};
  if (seasonality_test(train, m)) {
    const auto figure = stats::multiplicative_seasonal_figure(train, m);
    bool positive = true;
    for (double s : figure) positive = positive && s > 0.0 && std::isfinite(s);
    if (positive) {
      std::vector<double> adjusted(train.size());
      for (std::size_t t = 0; t < train.size(); ++t) adjusted[t] = train[t] / stats::seasonal_index(figure, t);
      auto f = methods::naive_on(adjusted, horizon, levels);
      for (std::size_t h = 0; h < f.point.size(); ++h) {
        const double s = stats::seasonal_index(figure, train.size() + h);
        f.point[h] *= s;
        f.bands[0].lower[h] *= s;
        f.bands[0].upper[h] *= s;
      }
      f.method_id = "naive2";
      return f.at_level(level);
    }
  }
  auto f = methods::naive_on(train, horizon, levels);
  f.method_id = "naive2";
  return f.at_level(level);
}

double err_cost(double mase_val, double msis_val, double mase_n2, double msis_n2) {
  if (!(mase_n2 > 0.0) || !(msis_n2 > 0.0)) {
    throw Error(ErrorKind::degenerate_benchmark, "naive2 benchmark error is zero");
  }
  return 0.5 * (mase_val / mase_n2 + msis_val / msis_n2);
}

double upper_coverage(std::span<const std::vector<double>> actuals,
                      std::span<const std::vector<double>> upper) {
  if (actuals.size() != upper.size()) throw Error(ErrorKind::length_mismatch, "series counts differ");
  std::size_t total = 0;
  std::size_t hit = 0;
  for (std::size_t n = 0; n < actuals.size(); ++n) {
    if (actuals[n].size() != upper[n].size()) {
      throw Error(ErrorKind::length_mismatch, "actuals and upper bounds differ in length");
    }
    for (std::size_t h = 0; h < actuals[n].size(); ++h) {
      ++total;
      if (actuals[n][h] <= upper[n][h]) ++hit;
    }
  }
  if (total == 0) throw Error(ErrorKind::empty_input, "no observations for coverage");
  return static_cast<double>(hit) / static_cast<double>(total);
}

double scaled_upper_pi(std::span<const double> train, std::span<const double> upper) {
  if (train.empty() || upper.empty()) throw Error(ErrorKind::empty_input, "empty input");
  double mt = 0.0;
  for (double v : train) mt += v;
  mt /= static_cast<double>(train.size());
  if (!(mt > 0.0)) throw Error(ErrorKind::nonpositive_history_mean, "history mean is not positive");
  double mu = 0.0;
  for (double v : upper) mu += v;
  mu /= static_cast<double>(upper.size());
  return mu / mt;
}

SeriesScores score_matrix(std::span<const double> train, std::span<const double> actuals,
                          const ForecastMatrix& fm, int m, double alpha) {
  const double level = 1.0 - alpha;
  const auto n2 = naive2_forecast(train, fm.horizon, m, level);
  const double mase_n2 = mase(train, actuals, n2.point, m);
  const double msis_n2 = msis(train, actuals, n2.lower, n2.upper, m, alpha);
  SeriesScores out;
  for (std::size_t i = 0; i < fm.method_count(); ++i) {
    const double a = mase(train, actuals, fm.point_row(i), m);
    const double b = msis(train, actuals, fm.lower_row(i), fm.upper_row(i), m, alpha);
    out.mase.push_back(a);
    out.msis.push_back(b);
    out.err.push_back(err_cost(a, b, mase_n2, msis_n2));
  }
  return out;
}

void ErrorMatrix::append(const std::string& series_id, const SeriesScores& scores) {
  if (scores.err.size() != cols()) throw Error(ErrorKind::length_mismatch, "score row has wrong width");
  series_ids.push_back(series_id);
  err.insert(err.end(), scores.err.begin(), scores.err.end());
  mase.insert(mase.end(), scores.mase.begin(), scores.mase.end());
  msis.insert(msis.end(), scores.msis.begin(), scores.msis.end());
}

void write_metrics_csv(std::ostream& out, const ErrorMatrix& matrix) {
  out << "series_id,method_id,mase,msis,err\n";
  for (std::size_t n = 0; n < matrix.rows(); ++n) {
    for (std::size_t i = 0; i < matrix.cols(); ++i) {
      const std::size_t k = n * matrix.cols() + i;
      out << fmt::format("{},{},{},{},{}\n", matrix.series_ids[n], matrix.method_ids[i],
                         matrix.mase[k], matrix.msis[k], matrix.err[k]);
    }
  }
}

}  // namespace divcomb::metrics
