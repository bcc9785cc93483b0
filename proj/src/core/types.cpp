#include "divcomb/core/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>
#include <utility>

namespace divcomb {

std::string_view error_kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "InvalidArgument";
    case ErrorKind::series_too_short: return "SeriesTooShort";
    case ErrorKind::length_mismatch: return "LengthMismatch";
    case ErrorKind::degenerate_scale: return "DegenerateScale";
    case ErrorKind::degenerate_benchmark: return "DegenerateBenchmark";
    case ErrorKind::empty_input: return "EmptyInput";
    case ErrorKind::nonpositive_history_mean: return "NonpositiveHistoryMean";
    case ErrorKind::feature_length_mismatch: return "FeatureLengthMismatch";
    case ErrorKind::empty_training_set: return "EmptyTrainingSet";
    case ErrorKind::weight_length_mismatch: return "WeightLengthMismatch";
    case ErrorKind::non_simplex_weights: return "NonSimplexWeights";
    case ErrorKind::misaligned_series: return "MisalignedSeries";
    case ErrorKind::unsupported_k: return "UnsupportedK";
    case ErrorKind::duplicate_id: return "DuplicateId";
    case ErrorKind::unparsable_value: return "UnparsableValue";
    case ErrorKind::missing_test_row: return "MissingTestRow";
    case ErrorKind::non_contiguous_index: return "NonContiguousIndex";
    case ErrorKind::invalid_config: return "InvalidConfig";
    case ErrorKind::format_version: return "FormatVersion";
    case ErrorKind::io: return "IoError";
    case ErrorKind::method_failure: return "MethodFailure";
  }
  return "Unknown";
}

std::string_view frequency_name(FrequencyLabel label) noexcept {
  switch (label) {
    case FrequencyLabel::yearly: return "yearly";
    case FrequencyLabel::quarterly: return "quarterly";
    case FrequencyLabel::monthly: return "monthly";
    case FrequencyLabel::weekly: return "weekly";
    case FrequencyLabel::daily: return "daily";
    case FrequencyLabel::hourly: return "hourly";
  }
  return "unknown";
}

std::string_view frequency_file_stem(FrequencyLabel label) noexcept {
  switch (label) {
    case FrequencyLabel::yearly: return "Yearly";
    case FrequencyLabel::quarterly: return "Quarterly";
    case FrequencyLabel::monthly: return "Monthly";
    case FrequencyLabel::weekly: return "Weekly";
    case FrequencyLabel::daily: return "Daily";
    case FrequencyLabel::hourly: return "Hourly";
  }
  return "Unknown";
}

std::optional<FrequencyLabel> parse_frequency(std::string_view text) {
  std::string lowered(text);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (FrequencyLabel label : kAllFrequencies) {
    if (lowered == frequency_name(label)) return label;
  }
  return std::nullopt;
}

Frequency Frequency::of(FrequencyLabel label) {
  switch (label) {
    case FrequencyLabel::yearly: return {label, 1, 6};
    case FrequencyLabel::quarterly: return {label, 4, 8};
    case FrequencyLabel::monthly: return {label, 12, 18};
    case FrequencyLabel::weekly: return {label, 1, 13};
    case FrequencyLabel::daily: return {label, 1, 14};
    case FrequencyLabel::hourly: return {label, 24, 48};
  }
  return {label, 1, 6};
}

Frequency Frequency::with_period(FrequencyLabel label, int seasonal_period) {
  if (seasonal_period < 1) {
    throw Error(ErrorKind::invalid_argument, "seasonal period must be >= 1");
  }
  Frequency f = of(label);
  f.seasonal_period = seasonal_period;
  return f;
}

namespace {

void check_finite(const std::string& id, std::span<const double> values) {
  for (std::size_t t = 0; t < values.size(); ++t) {
    if (!std::isfinite(values[t])) {
      throw Error(ErrorKind::invalid_argument,
                  "series '" + id + "': non-finite value at position " +
                      std::to_string(t + 1));
    }
  }
}

}  // namespace

TimeSeries::TimeSeries(std::string id, Frequency frequency,
                       std::vector<double> values, std::optional<int> horizon)
    : id_(std::move(id)),
      frequency_(frequency),
      values_(std::move(values)),
      horizon_(horizon.value_or(frequency.default_horizon)) {
  if (frequency_.seasonal_period < 1) {
    throw Error(ErrorKind::invalid_argument, "seasonal period must be >= 1");
  }
  if (horizon_ < 1) {
    throw Error(ErrorKind::invalid_argument, "horizon must be positive");
  }
  const std::size_t minimum =
      std::max<std::size_t>(3, static_cast<std::size_t>(frequency_.seasonal_period) + 1);
  if (values_.size() < minimum) {
    throw Error(ErrorKind::series_too_short,
                "series '" + id_ + "' has " + std::to_string(values_.size()) +
                    " observations, needs at least " + std::to_string(minimum));
  }
  check_finite(id_, values_);
}

TimeSeries TimeSeries::unchecked(std::string id, Frequency frequency,
                                 std::vector<double> values, int horizon) {
  TimeSeries s;
  s.id_ = std::move(id);
  s.frequency_ = frequency;
  s.values_ = std::move(values);
  s.horizon_ = horizon;
  if (s.horizon_ < 1) {
    throw Error(ErrorKind::invalid_argument, "horizon must be positive");
  }
  check_finite(s.id_, s.values_);
  return s;
}

SplitSeries split(const TimeSeries& series) {
  const std::size_t t = series.size();
  const auto h = static_cast<std::size_t>(series.horizon());
  const auto m = static_cast<std::size_t>(series.period());
  if (t <= h + m) {
    throw Error(ErrorKind::series_too_short,
                "series '" + series.id() + "' of length " + std::to_string(t) +
                    " cannot hold out horizon " + std::to_string(h) +
                    " with period " + std::to_string(m));
  }
  auto values = series.values();
  std::vector<double> train(values.begin(), values.end() - static_cast<std::ptrdiff_t>(h));
  std::vector<double> test(values.end() - static_cast<std::ptrdiff_t>(h), values.end());
  return SplitSeries{
      TimeSeries::unchecked(series.id(), series.frequency(), std::move(train),
                            series.horizon()),
      std::move(test)};
}

std::vector<double> join(const SplitSeries& split_series) {
  auto train = split_series.train.values();
  std::vector<double> out(train.begin(), train.end());
  out.insert(out.end(), split_series.test_actuals.begin(),
             split_series.test_actuals.end());
  return out;
}

void repair_interval(ForecastResult& result) {
  for (std::size_t h = 0; h < result.point.size(); ++h) {
    if (result.lower[h] > result.upper[h]) std::swap(result.lower[h], result.upper[h]);
    result.point[h] = std::clamp(result.point[h], result.lower[h], result.upper[h]);
  }
}

ForecastMatrix ForecastMatrix::from_results(std::string series_id,
                                            std::span<const ForecastResult> results) {
  if (results.size() < 2) {
    throw Error(ErrorKind::invalid_argument, "a forecast matrix needs at least two methods");
  }
  ForecastMatrix fm;
  fm.series_id = std::move(series_id);
  fm.horizon = static_cast<int>(results.front().point.size());
  fm.level = results.front().level;
  for (const auto& r : results) {
    if (static_cast<int>(r.point.size()) != fm.horizon ||
        static_cast<int>(r.lower.size()) != fm.horizon ||
        static_cast<int>(r.upper.size()) != fm.horizon) {
      throw Error(ErrorKind::length_mismatch,
                  "method '" + r.method_id + "' horizon differs from the pool");
    }
    fm.methods.push_back(r.method_id);
    fm.point.insert(fm.point.end(), r.point.begin(), r.point.end());
    fm.lower.insert(fm.lower.end(), r.lower.begin(), r.lower.end());
    fm.upper.insert(fm.upper.end(), r.upper.begin(), r.upper.end());
  }
  return fm;
}

}  // namespace divcomb
