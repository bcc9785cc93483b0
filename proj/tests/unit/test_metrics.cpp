#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "divcomb/metrics/metrics.hpp"
#include "divcomb/methods/simple.hpp"

using namespace divcomb;
using namespace divcomb::metrics;

namespace {
using V = std::vector<double>;
}

TEST(Mase, Examples) {
  EXPECT_DOUBLE_EQ(mase(V{1, 2, 3, 4}, V{5, 6}, V{4, 5}, 1), 1.0);
  EXPECT_DOUBLE_EQ(mase(V{1, 2, 3, 4}, V{5, 6}, V{5, 6}, 1), 0.0);
  EXPECT_THROW(mase(V{2, 2, 2}, V{5}, V{4}, 1), Error);
  try {
    mase(V{2, 2, 2}, V{5}, V{4}, 1);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_scale);
  }
}

TEST(Mase, SeasonalDenominator) {
  // m = 2: |3-1|, |4-2|, |5-3| -> 2
  EXPECT_DOUBLE_EQ(scale_denominator(V{1, 2, 3, 4, 5}, 2), 2.0);
}

TEST(Msis, Examples) {
  EXPECT_DOUBLE_EQ(msis(V{1, 2, 3}, V{3}, V{2}, V{4}, 1, 0.05), 2.0);
  EXPECT_DOUBLE_EQ(msis(V{1, 2, 3}, V{5}, V{2}, V{4}, 1, 0.05), 42.0);
  EXPECT_DOUBLE_EQ(msis(V{1, 2, 3}, V{1}, V{2}, V{4}, 1, 0.05), 42.0);
}

TEST(Metrics, ScaleInvariance) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(10, 2);
  for (int rep = 0; rep < 20; ++rep) {
    V train(20), act(4), pt(4), lo(4), hi(4);
    for (auto& v : train) v = n(rng);
    for (std::size_t h = 0; h < 4; ++h) {
      act[h] = n(rng);
      pt[h] = n(rng);
      lo[h] = pt[h] - 2;
      hi[h] = pt[h] + 2;
    }
    const double c = 37.5;
    auto s = [c](V v) {
      for (auto& x : v) x *= c;
      return v;
    };
    EXPECT_NEAR(mase(train, act, pt, 4), mase(s(train), s(act), s(pt), 4), 1e-12);
    EXPECT_NEAR(msis(train, act, lo, hi, 4), msis(s(train), s(act), s(lo), s(hi), 4), 1e-10);
  }
}

TEST(SeasonalityTest, Examples) {
  V sine;
  for (int t = 0; t < 120; ++t) sine.push_back(5 + std::sin(2 * std::numbers::pi * t / 12));
  EXPECT_FALSE(seasonality_test(sine, 1));
  EXPECT_TRUE(seasonality_test(sine, 12));
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed + 1000);
    std::normal_distribution<double> n(0, 1);
    V w(120);
    for (auto& v : w) v = n(rng);
    hits += seasonality_test(w, 12) ? 1 : 0;
  }
  EXPECT_LE(hits, 2);
}

TEST(Naive2, NonSeasonalEqualsNaive) {
  const V y{3, 1, 4, 1, 5, 9, 2, 6, 5, 3};
  const auto a = naive2_forecast(y, 4, 1);
  const auto b = methods::forecast_naive(
      TimeSeries::unchecked("s", Frequency::of(FrequencyLabel::yearly), y, 4), 4, 0.95);
  EXPECT_EQ(a.point, b.point);
  EXPECT_EQ(a.lower, b.lower);
  EXPECT_EQ(a.upper, b.upper);
}

TEST(Naive2, ReproducesMultiplicativePattern) {
  const V s{0.6, 0.9, 1.2, 1.3};
  V y;
  for (int t = 0; t < 24; ++t) y.push_back(40 * s[static_cast<std::size_t>(t % 4)]);
  const auto f = naive2_forecast(y, 8, 4);
  for (std::size_t h = 0; h < 8; ++h) EXPECT_NEAR(f.point[h], 40 * s[(24 + h) % 4], 1e-6);
}

TEST(ErrCost, Examples) {
  EXPECT_DOUBLE_EQ(err_cost(2, 6, 2, 6), 1.0);
  EXPECT_DOUBLE_EQ(err_cost(1, 3, 2, 6), 0.5);
  EXPECT_DOUBLE_EQ(err_cost(0, 0, 2, 6), 0.0);
  EXPECT_THROW(err_cost(1, 1, 0, 6), Error);
}

TEST(UpperCoverage, Examples) {
  const std::vector<V> act{{1, 2}, {3, 4}};
  EXPECT_DOUBLE_EQ(upper_coverage(act, std::vector<V>{{5, 5}, {5, 5}}), 1.0);
  EXPECT_DOUBLE_EQ(upper_coverage(act, std::vector<V>{{0, 0}, {5, 5}}), 0.5);
  EXPECT_THROW(upper_coverage(std::vector<V>{}, std::vector<V>{}), Error);
}

TEST(ScaledUpperPi, Examples) {
  EXPECT_DOUBLE_EQ(scaled_upper_pi(V{5, 15}, V{20, 20, 20}), 2.0);
  EXPECT_DOUBLE_EQ(scaled_upper_pi(V{10, 10}, V{10, 10}), 1.0);
  EXPECT_THROW(scaled_upper_pi(V{-1, 1}, V{3}), Error);
}

TEST(ScoreMatrix, Naive2RowScoresOne) {
  // When a pool row equals the naive2 forecast its cost is exactly one.
  V train;
  for (int t = 0; t < 20; ++t) train.push_back(10 + (t % 3) + 0.1 * t);
  const V actual{13, 12, 14};
  const auto n2 = naive2_forecast(train, 3, 1);
  ForecastMatrix fm;
  fm.series_id = "s";
  fm.methods = {"a", "b"};
  fm.horizon = 3;
  fm.point = n2.point;
  fm.point.insert(fm.point.end(), actual.begin(), actual.end());
  fm.lower = n2.lower;
  fm.lower.insert(fm.lower.end(), actual.begin(), actual.end());
  fm.upper = n2.upper;
  fm.upper.insert(fm.upper.end(), actual.begin(), actual.end());
  const auto sc = score_matrix(train, actual, fm, 1, 0.05);
  EXPECT_NEAR(sc.err[0], 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(sc.err[1], 0.0);
}
