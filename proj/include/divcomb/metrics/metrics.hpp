#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "divcomb/core/types.hpp"

namespace divcomb::metrics {

/// In-sample seasonal-naive MAE, (1/(T-m)) sum_{t>m} |y_t - y_{t-m}|.
/// Throws Error(degenerate_scale) when it is zero or T <= m.
double scale_denominator(std::span<const double> train, int m);

double mase(std::span<const double> train, std::span<const double> actuals,
            std::span<const double> point, int m);

/// Mean scaled interval score with the same scaling as MASE.
double msis(std::span<const double> train, std::span<const double> actuals,
            std::span<const double> lower, std::span<const double> upper, int m,
            double alpha = 0.05);

/// 90% ACF test at lag m (false for m <= 1 or T < 3m).
bool seasonality_test(std::span<const double> train, int m);

/// Naive on multiplicatively seasonally adjusted data when the seasonality
/// test fires, plain naive otherwise (also when an index is nonpositive).
ForecastResult naive2_forecast(std::span<const double> train, int horizon, int m,
                               double level = 0.95);

/// 0.5 (mase / mase_n2 + msis / msis_n2). Throws Error(degenerate_benchmark)
/// when a benchmark term is zero.
double err_cost(double mase_val, double msis_val, double mase_n2, double msis_n2);

/// Fraction of (series, step) pairs with actual <= upper.
double upper_coverage(std::span<const std::vector<double>> actuals,
                      std::span<const std::vector<double>> upper);

/// mean(upper) / mean(train). Throws Error(nonpositive_history_mean).
double scaled_upper_pi(std::span<const double> train, std::span<const double> upper);

/// MASE, MSIS and cost of every row of a forecast matrix for one series.
struct SeriesScores {
  std::vector<double> mase;
  std::vector<double> msis;
  std::vector<double> err;
};

/// Throws Error(degenerate_scale) / Error(degenerate_benchmark) for series
/// that must be excluded.
SeriesScores score_matrix(std::span<const double> train, std::span<const double> actuals,
                          const ForecastMatrix& fm, int m, double alpha);

/// N x M cost matrix with MASE and MSIS companions, row-major.
struct ErrorMatrix {
  std::vector<std::string> series_ids;
  std::vector<std::string> method_ids;
  std::vector<double> err;
  std::vector<double> mase;
  std::vector<double> msis;

  std::size_t rows() const noexcept { return series_ids.size(); }
  std::size_t cols() const noexcept { return method_ids.size(); }
  void append(const std::string& series_id, const SeriesScores& scores);
  std::span<const double> err_row(std::size_t n) const {
    return std::span<const double>(err).subspan(n * cols(), cols());
  }
};

/// series_id,method_id,mase,msis,err
void write_metrics_csv(std::ostream& out, const ErrorMatrix& matrix);

}  // namespace divcomb::metrics
