#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "divcomb/methods/pool.hpp"
#include "divcomb/methods/simple.hpp"

using namespace divcomb;
using namespace divcomb::methods;

namespace {

const FrequencyLabel kLabels[] = {FrequencyLabel::yearly, FrequencyLabel::quarterly,
                                  FrequencyLabel::monthly, FrequencyLabel::weekly,
                                  FrequencyLabel::daily};

// Random short series of mixed shapes: noise, trend, season, level shifts,
// near-constant runs and occasional zeros.
TimeSeries random_series(std::mt19937_64& rng, int index) {
  const auto label = kLabels[index % 5];
  const Frequency freq = Frequency::of(label);
  const int m = freq.seasonal_period;
  std::uniform_int_distribution<int> len(std::max(4, m + 2), 3 * m + 30);
  std::normal_distribution<double> n(0, 1);
  std::uniform_real_distribution<double> u(0, 1);
  const int t_len = len(rng);
  const double level = std::exp(u(rng) * 8);
  const double slope = (u(rng) - 0.5) * level * 0.05;
  const double amp = u(rng) < 0.5 ? 0.0 : u(rng) * level * 0.3;
  const double sd = u(rng) * level * 0.1;
  const bool flat = u(rng) < 0.05;
  std::vector<double> y;
  for (int t = 0; t < t_len; ++t) {
    double v = flat ? level : level + slope * t + amp * std::sin(6.283185307179586 * t / std::max(m, 2)) + sd * n(rng);
    if (u(rng) < 0.01) v = 0.0;
    y.push_back(v);
  }
  return TimeSeries::unchecked("f" + std::to_string(index), freq, std::move(y), 6);
}

}  // namespace

TEST(Pool, DefaultOrderAndValidation) {
  EXPECT_EQ(default_pool_ids(), (std::vector<std::string>{"auto_arima", "ets", "ets_boxcox", "stlm_ar",
                                                          "rw_drift", "theta", "naive", "snaive"}));
  EXPECT_THROW(Pool({"naive"}), Error);
  EXPECT_THROW(Pool({"naive", "naive"}), Error);
  EXPECT_THROW(Pool({"naive", "prophet"}), Error);
  EXPECT_EQ(Pool({"naive", "theta"}).size(), 2u);
}

TEST(Pool, FallbackChainsEndAtNaive) {
  for (const auto& id : registered_method_ids()) {
    std::string cur = id;
    int steps = 0;
    while (method_spec(cur).fallback_id && steps < 10) {
      cur = *method_spec(cur).fallback_id;
      ++steps;
    }
    EXPECT_EQ(cur, "naive") << id;
  }
}

TEST(Pool, FallbackUsedWhenMethodCannotFit) {
  // Seven values: auto_arima refuses (T < 8) and falls back to rw_drift.
  const auto s = TimeSeries::unchecked("s", Frequency::of(FrequencyLabel::yearly), {1, 2, 4, 3, 5, 6, 8}, 3);
  const auto f = forecast_with_fallback("auto_arima", s, 3, MethodContext{});
  EXPECT_EQ(f.method_id, "auto_arima");
  EXPECT_EQ(f.fitted_by, "rw_drift");
  const auto d = rw_drift(s, 3, MethodContext{});
  EXPECT_EQ(f.point, d.point);
}

TEST(Pool, FuzzCorpusFiniteAndOrdered) {
  const Pool pool;
  std::mt19937_64 rng(97);
  const MethodContext ctx{{0.95}, 5};
  for (int i = 0; i < 1000; ++i) {
    const auto s = random_series(rng, i);
    const auto out = pool.forecast_all(s, 6, ctx);
    ASSERT_EQ(out.size(), pool.size());
    const auto fm = to_matrix(s.id(), out, 0.95);
    ASSERT_EQ(fm.point.size(), pool.size() * 6);
    for (std::size_t k = 0; k < fm.point.size(); ++k) {
      ASSERT_TRUE(std::isfinite(fm.point[k]) && std::isfinite(fm.lower[k]) && std::isfinite(fm.upper[k]))
          << s.id() << " " << out[k / 6].method_id;
      ASSERT_LE(fm.lower[k], fm.point[k]);
      ASSERT_LE(fm.point[k], fm.upper[k]);
    }
  }
}

TEST(Pool, Deterministic) {
  std::mt19937_64 rng(3);
  const Pool pool;
  for (int i = 0; i < 10; ++i) {
    const auto s = random_series(rng, i);
    const auto a = to_matrix(s.id(), pool.forecast_all(s, 6, MethodContext{{0.95}, 11}), 0.95);
    const auto b = to_matrix(s.id(), pool.forecast_all(s, 6, MethodContext{{0.95}, 11}), 0.95);
    EXPECT_EQ(a.point, b.point);
    EXPECT_EQ(a.lower, b.lower);
    EXPECT_EQ(a.upper, b.upper);
  }
}

TEST(Pool, MultipleLevelsNest) {
  std::vector<double> y;
  for (int t = 0; t < 48; ++t) y.push_back(100 + t + 10 * std::sin(t * 0.5236) + (t % 3));
  const auto s = TimeSeries::unchecked("s", Frequency::of(FrequencyLabel::monthly), y, 12);
  const auto out = Pool().forecast_all(s, 12, MethodContext{{0.8, 0.95}, 1});
  const auto narrow = to_matrix("s", out, 0.8);
  const auto wide = to_matrix("s", out, 0.95);
  for (std::size_t k = 0; k < narrow.upper.size(); ++k) {
    EXPECT_LE(narrow.upper[k], wide.upper[k] + 1e-9);
    EXPECT_GE(narrow.lower[k], wide.lower[k] - 1e-9);
  }
}
