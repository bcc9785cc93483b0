#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "divcomb/core/error.hpp"

namespace divcomb {

enum class FrequencyLabel { yearly, quarterly, monthly, weekly, daily, hourly };

inline constexpr FrequencyLabel kAllFrequencies[] = {
    FrequencyLabel::yearly, FrequencyLabel::quarterly, FrequencyLabel::monthly,
    FrequencyLabel::weekly, FrequencyLabel::daily,     FrequencyLabel::hourly};

/// Lower-case label ("monthly").
std::string_view frequency_name(FrequencyLabel label) noexcept;
/// Capitalized label as used by the public M4 file names ("Monthly").
std::string_view frequency_file_stem(FrequencyLabel label) noexcept;
/// Parses either spelling, case-insensitively.
std::optional<FrequencyLabel> parse_frequency(std::string_view text);

struct Frequency {
  FrequencyLabel label = FrequencyLabel::yearly;
  int seasonal_period = 1;  // m; 1 means non-seasonal
  int default_horizon = 6;  // H

  /// Default table: horizons 6/8/18/13/14/48, periods 1/4/12/1/1/24.
  static Frequency of(FrequencyLabel label);
  /// Same as `of` but with an explicit seasonal period.
  static Frequency with_period(FrequencyLabel label, int seasonal_period);

  friend bool operator==(const Frequency&, const Frequency&) = default;
};

/// One univariate series. Immutable once constructed.
class TimeSeries {
 public:
  /// Throws Error(series_too_short) when T < max(3, m + 1) and
  /// Error(invalid_argument) for non-finite values or a non-positive horizon.
  TimeSeries(std::string id, Frequency frequency, std::vector<double> values,
             std::optional<int> horizon = std::nullopt);

  /// Builds a series without the ingestion-length rule. Used for training
  /// windows inside the pipeline, where methods handle short inputs by
  /// falling back.
  static TimeSeries unchecked(std::string id, Frequency frequency,
                              std::vector<double> values, int horizon);

  const std::string& id() const noexcept { return id_; }
  const Frequency& frequency() const noexcept { return frequency_; }
  int period() const noexcept { return frequency_.seasonal_period; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  int horizon() const noexcept { return horizon_; }

 private:
  TimeSeries() = default;

  std::string id_;
  Frequency frequency_;
  std::vector<double> values_;
  int horizon_ = 1;
};

struct SplitSeries {
  TimeSeries train;
  std::vector<double> test_actuals;
};

/// Holds out the last `horizon` observations. Throws Error(series_too_short)
/// when T <= H + m.
SplitSeries split(const TimeSeries& series);
/// Inverse of split.
std::vector<double> join(const SplitSeries& split_series);

/// Point forecast and one prediction interval at a single confidence level.
struct ForecastResult {
  std::string method_id;
  std::vector<double> point;
  std::vector<double> lower;
  std::vector<double> upper;
  double level = 0.95;
};

/// Swaps crossed bounds and clamps the point forecast into [lower, upper].
void repair_interval(ForecastResult& result);

/// M x H point/lower/upper forecasts of the pool for one series, row-major
/// with rows in pool order.
struct ForecastMatrix {
  std::string series_id;
  std::vector<std::string> methods;
  int horizon = 0;
  double level = 0.95;
  std::vector<double> point;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t method_count() const noexcept { return methods.size(); }
  std::span<const double> point_row(std::size_t i) const {
    return std::span<const double>(point).subspan(i * horizon, horizon);
  }
  std::span<const double> lower_row(std::size_t i) const {
    return std::span<const double>(lower).subspan(i * horizon, horizon);
  }
  std::span<const double> upper_row(std::size_t i) const {
    return std::span<const double>(upper).subspan(i * horizon, horizon);
  }

  /// Assembles a matrix from per-method results (all at the same level and
  /// horizon). Throws on M < 2 or shape mismatch.
  static ForecastMatrix from_results(std::string series_id,
                                     std::span<const ForecastResult> results);
};

}  // namespace divcomb
