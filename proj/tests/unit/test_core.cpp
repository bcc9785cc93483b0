#include <cmath>
#include <gtest/gtest.h>

#include "divcomb/core/types.hpp"

using namespace divcomb;

TEST(Frequency, DefaultTable) {
  const int horizons[] = {6, 8, 18, 13, 14, 48};
  const int periods[] = {1, 4, 12, 1, 1, 24};
  for (std::size_t i = 0; i < 6; ++i) {
    const auto f = Frequency::of(kAllFrequencies[i]);
    EXPECT_EQ(f.default_horizon, horizons[i]);
    EXPECT_EQ(f.seasonal_period, periods[i]);
  }
  EXPECT_EQ(Frequency::with_period(FrequencyLabel::weekly, 52).seasonal_period, 52);
  EXPECT_THROW(Frequency::with_period(FrequencyLabel::weekly, 0), Error);
}

TEST(Frequency, Parse) {
  EXPECT_EQ(parse_frequency("Monthly"), FrequencyLabel::monthly);
  EXPECT_EQ(parse_frequency("hourly"), FrequencyLabel::hourly);
  EXPECT_FALSE(parse_frequency("fortnightly"));
}

TEST(TimeSeries, RejectsShortAndNonFinite) {
  EXPECT_THROW(TimeSeries("a", Frequency::of(FrequencyLabel::yearly), {1, 2}), Error);
  EXPECT_THROW(TimeSeries("a", Frequency::of(FrequencyLabel::quarterly), {1, 2, 3, 4}), Error);
  EXPECT_NO_THROW(TimeSeries("a", Frequency::of(FrequencyLabel::quarterly), {1, 2, 3, 4, 5}));
  EXPECT_THROW(TimeSeries("a", Frequency::of(FrequencyLabel::yearly), std::vector<double>{1, std::nan(""), 3}), Error);
  const TimeSeries s("a", Frequency::of(FrequencyLabel::monthly), std::vector<double>(20, 1.0));
  EXPECT_EQ(s.horizon(), 18);
}

TEST(Split, SuffixSplit) {
  const TimeSeries s("a", Frequency::of(FrequencyLabel::yearly), {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 2);
  const auto parts = split(s);
  EXPECT_EQ(std::vector<double>(parts.train.values().begin(), parts.train.values().end()),
            (std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8}));
  EXPECT_EQ(parts.test_actuals, (std::vector<double>{9, 10}));
}

TEST(Split, MinimumYearly) {
  std::vector<double> y(13);
  for (int i = 0; i < 13; ++i) y[static_cast<std::size_t>(i)] = i;
  const auto parts = split(TimeSeries("y", Frequency::of(FrequencyLabel::yearly), y));
  EXPECT_EQ(parts.train.size(), 7u);
  EXPECT_EQ(parts.test_actuals.size(), 6u);
}

TEST(Split, TooShort) {
  const TimeSeries s("a", Frequency::of(FrequencyLabel::yearly), {1, 2, 3, 4, 5, 6, 7});
  try {
    split(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::series_too_short);
  }
}

TEST(Split, JoinRoundTrip) {
  for (int len = 20; len < 60; len += 7) {
    std::vector<double> y;
    for (int i = 0; i < len; ++i) y.push_back(i * 1.5 - 3);
    const TimeSeries s("q", Frequency::of(FrequencyLabel::quarterly), y);
    EXPECT_EQ(join(split(s)), y);
  }
}

TEST(ForecastResult, RepairSwapsAndClamps) {
  ForecastResult r{"x", {5, 0, 2}, {6, -1, 3}, {4, 1, 4}, 0.95};
  repair_interval(r);
  EXPECT_EQ(r.lower, (std::vector<double>{4, -1, 3}));
  EXPECT_EQ(r.upper, (std::vector<double>{6, 1, 4}));
  EXPECT_EQ(r.point, (std::vector<double>{5, 0, 3}));
}

TEST(ForecastMatrix, FromResults) {
  std::vector<ForecastResult> rs{{"a", {1, 2}, {0, 1}, {2, 3}, 0.9}, {"b", {3, 4}, {2, 3}, {4, 5}, 0.9}};
  const auto fm = ForecastMatrix::from_results("s", rs);
  EXPECT_EQ(fm.method_count(), 2u);
  EXPECT_EQ(fm.point_row(1)[0], 3);
  EXPECT_EQ(fm.upper_row(0)[1], 3);
  EXPECT_THROW(ForecastMatrix::from_results("s", std::span(rs).first(1)), Error);
}
