#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "divcomb/methods/arima.hpp"
#include "divcomb/methods/ets.hpp"
#include "divcomb/methods/simple.hpp"
#include "divcomb/methods/stlm_ar.hpp"
#include "divcomb/methods/theta.hpp"
#include "divcomb/stats/basic.hpp"
#include "divcomb/stats/seasonal.hpp"

using namespace divcomb;
using namespace divcomb::methods;

namespace {

TimeSeries series(std::vector<double> y, FrequencyLabel f = FrequencyLabel::yearly, int h = 6) {
  return TimeSeries::unchecked("s", Frequency::of(f), std::move(y), h);
}

TimeSeries with_period(std::vector<double> y, int m, int h) {
  return TimeSeries::unchecked("s", Frequency::with_period(FrequencyLabel::monthly, m), std::move(y), h);
}

std::vector<double> noise(std::uint64_t seed, int n, double mu = 0.0, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(mu, sd);
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(d(rng));
  return out;
}

// Classical two-line theta: average of the extrapolated regression line and
// SES (grid-searched alpha) applied to the theta = 2 line.
std::vector<double> classical_theta(const std::vector<double>& y, int h) {
  const double n = static_cast<double>(y.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double t = static_cast<double>(i + 1);
    st += t;
    sy += y[i];
    stt += t * t;
    sty += t * y[i];
  }
  const double b = (n * sty - st * sy) / (n * stt - st * st);
  const double a = (sy - b * st) / n;
  std::vector<double> line2;
  for (std::size_t i = 0; i < y.size(); ++i) line2.push_back(2 * y[i] - (a + b * static_cast<double>(i + 1)));
  double best_sse = 1e300, best_level = 0;
  for (int k = 1; k <= 1000; ++k) {
    const double alpha = k / 1000.0;
    double level = line2[0], sse = 0;
    for (std::size_t i = 1; i < line2.size(); ++i) {
      sse += (line2[i] - level) * (line2[i] - level);
      level += alpha * (line2[i] - level);
    }
    if (sse < best_sse) {
      best_sse = sse;
      best_level = level;
    }
  }
  std::vector<double> out;
  for (int k = 1; k <= h; ++k) out.push_back(0.5 * (a + b * (n + k)) + 0.5 * best_level);
  return out;
}

}  // namespace

TEST(Naive, Examples) {
  const MethodContext ctx;
  auto f = forecast_naive(series({5, 5, 5}), 2, 0.95);
  EXPECT_EQ(f.point, (std::vector<double>{5, 5}));
  EXPECT_EQ(f.lower, f.point);
  EXPECT_EQ(f.upper, f.point);
  EXPECT_EQ(forecast_naive(series({1, 2, 3}), 2, 0.95).point, (std::vector<double>{3, 3}));
  auto g = forecast_naive(series({1, 2, 3}), 1, 0.95);
  EXPECT_EQ(g.lower[0], 3);
  EXPECT_EQ(g.upper[0], 3);
}

TEST(Naive, IntervalGrowsWithSqrtH) {
  const std::vector<double> y{1, 3, 2, 5, 4, 6};
  auto f = forecast_naive(series(y), 4, 0.95);
  // residuals 2,-1,3,-1,2 -> sample sd
  const std::vector<double> r{2, -1, 3, -1, 2};
  const double sd = stats::stddev(r);
  for (int h = 1; h <= 4; ++h) {
    EXPECT_NEAR(f.upper[static_cast<std::size_t>(h - 1)] - 6, 1.959963984540054 * sd * std::sqrt(h), 1e-9);
  }
}

TEST(SeasonalNaive, Examples) {
  EXPECT_EQ(forecast_snaive(with_period({1, 2, 3, 4}, 4, 4), 4, 0.95).point, (std::vector<double>{1, 2, 3, 4}));
  EXPECT_EQ(forecast_snaive(with_period({1, 2, 3, 4}, 4, 6), 6, 0.95).point,
            (std::vector<double>{1, 2, 3, 4, 1, 2}));
  const auto y = std::vector<double>{3, 1, 4, 1, 5, 9, 2, 6};
  const auto a = forecast_snaive(series(y), 3, 0.9);
  const auto b = forecast_naive(series(y), 3, 0.9);
  EXPECT_EQ(a.point, b.point);
  EXPECT_EQ(a.lower, b.lower);
  EXPECT_EQ(a.upper, b.upper);
}

TEST(RwDrift, Examples) {
  EXPECT_EQ(forecast_rw_drift(series({1, 2, 3, 4}), 2, 0.95).point, (std::vector<double>{5, 6}));
  EXPECT_EQ(forecast_rw_drift(series({7, 7, 7}), 3, 0.95).point, (std::vector<double>{7, 7, 7}));
  EXPECT_EQ(forecast_rw_drift(series({0, 2}), 1, 0.95).point, (std::vector<double>{4}));
  EXPECT_THROW(forecast_rw_drift(series({1}), 1, 0.95), Error);
}

TEST(Theta, ConstantSeriesExact) {
  const auto f = forecast_theta(series(std::vector<double>(12, 4.25)), 5, 0.95);
  for (double v : f.point) EXPECT_EQ(v, 4.25);
}

TEST(Theta, LinearInputMatchesTwoLineOracle) {
  std::vector<double> y;
  for (int t = 1; t <= 10; ++t) y.push_back(t);
  const auto f = forecast_theta(series(y, FrequencyLabel::yearly, 2), 2, 0.95);
  const auto oracle = classical_theta(y, 2);
  for (std::size_t h = 0; h < 2; ++h) EXPECT_NEAR(f.point[h], oracle[h], 0.25);
}

// SES with drift b/2: brute-force grid over alpha and the initial level.
static std::vector<double> ses_drift_oracle(const std::vector<double>& y, int h) {
  const double n = static_cast<double>(y.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double t = static_cast<double>(i);
    st += t;
    sy += y[i];
    stt += t * t;
    sty += t * y[i];
  }
  const double b = (n * sty - st * sy) / (n * stt - st * st);
  double best = 1e300, best_alpha = 0, best_level = 0;
  for (int ka = 1; ka < 1000; ++ka) {
    const double alpha = ka / 1000.0;
    for (int kl = -200; kl <= 200; ++kl) {
      double level = y[0] + kl * 0.05, sse = 0;
      for (double v : y) {
        sse += (v - level) * (v - level);
        level += alpha * (v - level);
      }
      if (sse < best) {
        best = sse;
        best_alpha = alpha;
        best_level = level;
      }
    }
  }
  const double damp = (1 - std::pow(1 - best_alpha, n)) / best_alpha;
  std::vector<double> out;
  for (int k = 0; k < h; ++k) out.push_back(best_level + 0.5 * b * (k + damp));
  return out;
}

TEST(Theta, NoisyInputMatchesSesDriftOracle) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto y = noise(seed, 40, 0.0, 1.0);
    for (std::size_t t = 0; t < y.size(); ++t) y[t] += 50 + 0.3 * static_cast<double>(t);
    const auto f = forecast_theta(series(y), 6, 0.95);
    const auto oracle = ses_drift_oracle(y, 6);
    for (std::size_t h = 0; h < 6; ++h) EXPECT_NEAR(f.point[h], oracle[h], 0.1) << "seed " << seed;
  }
}

TEST(Theta, ReproducesMultiplicativeSeason) {
  const std::vector<double> s{0.7, 1.0, 1.4, 0.9};
  std::vector<double> y;
  for (int t = 0; t < 32; ++t) y.push_back(100 * s[static_cast<std::size_t>(t % 4)]);
  const auto f = forecast_theta(with_period(y, 4, 8), 8, 0.95);
  for (std::size_t h = 0; h < 8; ++h) EXPECT_NEAR(f.point[h], 100 * s[(32 + h) % 4], 1e-6);
}

TEST(Ets, WhiteNoiseSelectsNoTrendNoSeason) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto y = noise(seed, 200, 10.0, 1.0);
    const auto model = select_ets(y, 4);
    ASSERT_TRUE(model);
    hits += model->spec.trend == EtsTrend::none && model->spec.season == EtsComponent::none ? 1 : 0;
  }
  EXPECT_GE(hits, 18);
}

TEST(Ets, ConstantSeries) {
  const auto f = forecast_ets(series(std::vector<double>(30, 7.5)), 6, 0.95);
  for (double v : f.point) EXPECT_NEAR(v, 7.5, 1e-6);
}

TEST(Ets, AiccPenalisesParameters) {
  EXPECT_LT(ets_aicc(100.0, 3, 50), ets_aicc(100.0, 4, 50));
}

TEST(Ets, SeasonalPatternTracked) {
  auto y = noise(3, 96, 0.0, 0.5);
  for (std::size_t t = 0; t < y.size(); ++t) y[t] += 50 + 8 * std::sin(2 * std::numbers::pi * static_cast<double>(t) / 12);
  const auto f = forecast_ets(with_period(y, 12, 12), 12, 0.95);
  for (std::size_t h = 0; h < 12; ++h) {
    EXPECT_NEAR(f.point[h], 50 + 8 * std::sin(2 * std::numbers::pi * static_cast<double>(96 + h) / 12), 1.5);
  }
}

TEST(EtsBoxCox, LambdaOneIsAffineShiftOfEts) {
  auto y = noise(11, 60, 100.0, 5.0);
  const MethodContext ctx;
  const auto bc = ets_boxcox_fixed(series(y), 6, ctx, 1.0);
  const auto plain = ets(series(y), 6, ctx);
  for (std::size_t h = 0; h < 6; ++h) EXPECT_NEAR(bc.point[h], plain.point[h], 1e-6 * std::abs(plain.point[h]));
}

TEST(EtsBoxCox, ExponentialGrowthPicksLogScale) {
  auto e = noise(5, 80, 0.0, 0.01);
  std::vector<double> y;
  for (std::size_t t = 0; t < e.size(); ++t) y.push_back(10 * std::exp(0.05 * static_cast<double>(t) + e[t]));
  EXPECT_LT(stats::guerrero_lambda(y, 1), 0.2);
  const auto f = forecast_ets_boxcox(series(y), 6, 0.95);
  for (double v : f.point) EXPECT_GT(v, 0.0);
  for (double v : f.lower) EXPECT_GT(v, 0.0);
}

TEST(EtsBoxCox, ZeroValueFallsBackToEts) {
  auto y = noise(8, 40, 20.0, 3.0);
  y[10] = 0.0;
  const auto a = forecast_ets_boxcox(series(y), 6, 0.95);
  const auto b = forecast_ets(series(y), 6, 0.95);
  EXPECT_EQ(a.point, b.point);
  EXPECT_EQ(a.upper, b.upper);
}

TEST(StlmAr, SineAroundConstantLevel) {
  std::vector<double> y;
  for (int t = 0; t < 120; ++t) y.push_back(30 + 5 * std::sin(2 * std::numbers::pi * t / 12));
  const auto f = forecast_stlm_ar(with_period(y, 12, 12), 12, 0.95);
  for (std::size_t h = 0; h < 12; ++h) {
    EXPECT_NEAR(f.point[h], 30 + 5 * std::sin(2 * std::numbers::pi * static_cast<double>(120 + h) / 12), 0.25);
  }
}

TEST(StlmAr, NonSeasonalFallsBackToEts) {
  const auto y = noise(4, 40, 10.0, 1.0);
  const auto a = forecast_stlm_ar(series(y), 6, 0.95);
  const auto b = forecast_ets(series(y), 6, 0.95);
  EXPECT_EQ(a.point, b.point);
  EXPECT_EQ(a.lower, b.lower);
}

TEST(StlmAr, WhiteNoiseRemainderGivesOrderZero) {
  int zeros = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) zeros += fit_ar_yule_walker(noise(seed, 200)).order == 0 ? 1 : 0;
  EXPECT_GE(zeros, 14);
  const auto fit = fit_ar_yule_walker(noise(0, 200));
  if (fit.order == 0) {
    std::vector<double> p, sd;
    ar_forecast(fit, noise(0, 200), 3, p, sd);
    for (double v : p) EXPECT_DOUBLE_EQ(v, fit.mean);
  }
}

TEST(StlmAr, YuleWalkerRecoversAr1) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> x{0};
  for (int t = 1; t < 2000; ++t) x.push_back(0.6 * x.back() + n(rng));
  const auto fit = fit_ar_yule_walker(x, 1);
  EXPECT_NEAR(fit.coefficients[0], 0.6, 0.05);
}

TEST(AutoArima, Ar1Simulation) {
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0, 1);
    std::vector<double> z{0};
    for (int t = 1; t < 500; ++t) z.push_back(0.8 * z.back() + n(rng));
    const auto model = select_arima(z, 1);
    ASSERT_TRUE(model);
    std::vector<double> p, sd;
    arima_forecast(*model, z, 1, p, sd);
    ok += model->order.p >= 1 && std::abs(p[0] - 0.8 * z.back()) < 3 * sd[0] ? 1 : 0;
  }
  EXPECT_GE(ok, 16);
}

TEST(AutoArima, RandomWalkDifferencedOnce) {
  int d1 = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto e = noise(seed + 100, 200);
    std::vector<double> z{0};
    for (double v : e) z.push_back(z.back() + v);
    const auto model = select_arima(z, 1);
    ASSERT_TRUE(model);
    d1 += model->order.d == 1 ? 1 : 0;
  }
  EXPECT_GE(d1, 16);
}

TEST(AutoArima, WhiteNoiseMeanModel) {
  // Among 10 seeds most select the mean model; each mean-model forecast is
  // the sample mean.
  int mean_models = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto y = noise(seed + 7, 150, 5.0, 1.0);
    const auto model = select_arima(y, 1);
    ASSERT_TRUE(model);
    const auto& o = model->order;
    if (o.p == 0 && o.q == 0 && o.d == 0 && o.constant) {
      ++mean_models;
      std::vector<double> p, sd;
      arima_forecast(*model, y, 4, p, sd);
      for (double v : p) EXPECT_NEAR(v, stats::mean(y), 1e-6);
    }
  }
  EXPECT_GE(mean_models, 7);
}

TEST(AutoArima, TooShortThrows) {
  EXPECT_THROW(auto_arima(series({1, 2, 3, 4, 5, 6, 7}), 2, MethodContext{}), Error);
}

TEST(AutoArima, SeasonalRandomWalkForecastsPattern) {
  std::vector<double> y;
  auto e = noise(9, 96, 0.0, 0.3);
  for (int t = 0; t < 96; ++t) y.push_back(20 + 6 * std::sin(2 * std::numbers::pi * t / 12) + e[static_cast<std::size_t>(t)]);
  const auto f = forecast_auto_arima(with_period(y, 12, 12), 12, 0.95);
  for (std::size_t h = 0; h < 12; ++h) {
    EXPECT_NEAR(f.point[h], 20 + 6 * std::sin(2 * std::numbers::pi * static_cast<double>(96 + h) / 12), 1.5);
  }
}
