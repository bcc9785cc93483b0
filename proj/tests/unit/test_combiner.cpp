#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "divcomb/combiner/combiner.hpp"

using namespace divcomb;
using namespace divcomb::combiner;

namespace {

ForecastMatrix matrix(std::vector<std::vector<double>> rows) {
  ForecastMatrix fm;
  fm.series_id = "s";
  fm.horizon = static_cast<int>(rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    fm.methods.push_back("m" + std::to_string(i));
    for (double v : rows[i]) {
      fm.point.push_back(v);
      fm.lower.push_back(v - 1);
      fm.upper.push_back(v + 1);
    }
  }
  return fm;
}

TimeSeries linear(const std::string& id, double level, double slope, int n) {
  std::vector<double> y;
  for (int t = 0; t < n; ++t) y.push_back(level + slope * t);
  return TimeSeries(id, Frequency::of(FrequencyLabel::yearly), std::move(y), 6);
}

}  // namespace

TEST(Combine, Examples) {
  const auto fm = matrix({{2}, {4}});
  EXPECT_EQ(combine(fm, std::vector<double>{0.5, 0.5}).point, (std::vector<double>{3}));
  const auto fm3 = matrix({{1, 2}, {5, 6}, {9, 9}});
  const auto one_hot = combine(fm3, std::vector<double>{0, 1, 0});
  EXPECT_EQ(one_hot.point, (std::vector<double>{5, 6}));
  EXPECT_EQ(one_hot.lower, (std::vector<double>{4, 5}));
  const auto same = combine(matrix({{7, 8}, {7, 8}, {7, 8}}), std::vector<double>{0.2, 0.3, 0.5});
  for (std::size_t h = 0; h < 2; ++h) EXPECT_NEAR(same.point[h], 7.0 + static_cast<double>(h), 1e-12);
}

TEST(Combine, Errors) {
  const auto fm = matrix({{2}, {4}});
  auto kind = [&](std::vector<double> w) {
    try {
      combine(fm, w);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::io;
  };
  EXPECT_EQ(kind({1.0}), ErrorKind::weight_length_mismatch);
  EXPECT_EQ(kind({0.7, 0.7}), ErrorKind::non_simplex_weights);
  EXPECT_EQ(kind({1.5, -0.5}), ErrorKind::non_simplex_weights);
}

TEST(Combine, UniformWeightsEqualSimpleAverage) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(100, 30);
  std::vector<std::vector<double>> rows(8, std::vector<double>(13));
  for (auto& r : rows) {
    for (auto& v : r) v = n(rng);
  }
  const auto fm = matrix(rows);
  const auto a = combine(fm, std::vector<double>(8, 0.125));
  const auto b = simple_average(fm);
  EXPECT_EQ(a.point, b.point);
  EXPECT_EQ(a.lower, b.lower);
  EXPECT_EQ(a.upper, b.upper);
}

// Convexity of the loss: the combined squared error never exceeds the
// weighted average of the members' squared errors.
TEST(Combine, ErrorBelowWeightedMemberError) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0, 1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t m = 2 + static_cast<std::size_t>(rep % 6), h = 5;
    std::vector<std::vector<double>> rows(m, std::vector<double>(h));
    for (auto& r : rows) {
      for (auto& v : r) v = n(rng);
    }
    std::vector<double> w(m), y(h);
    double sum = 0;
    for (auto& v : w) sum += (v = u(rng));
    for (auto& v : w) v /= sum;
    for (auto& v : y) v = n(rng);
    const auto c = combine(matrix(rows), w);
    double lhs = 0, rhs = 0;
    for (std::size_t k = 0; k < h; ++k) {
      lhs += (c.point[k] - y[k]) * (c.point[k] - y[k]);
      for (std::size_t i = 0; i < m; ++i) rhs += w[i] * (rows[i][k] - y[k]) * (rows[i][k] - y[k]);
    }
    ASSERT_LE(lhs, rhs + 1e-12);
  }
}

TEST(TrainPhase, ConcentratesOnStrictlyBestMethod) {
  // On straight lines rw_drift is exact while naive is not.
  std::vector<TimeSeries> ref;
  for (int k = 0; k < 30; ++k) ref.push_back(linear("s" + std::to_string(100 + k), 10 + k, 0.5 + 0.1 * k, 20 + k % 7));
  const methods::Pool pool({"naive", "rw_drift"});
  const auto res = train_phase(ref, pool, gbm::GbmParams{}, PhaseOptions{});
  ASSERT_EQ(res.errors.rows(), 30u);
  for (std::size_t r = 0; r < res.data.rows; ++r) {
    EXPECT_LT(res.data.e_row(r)[1], res.data.e_row(r)[0]);
    EXPECT_GT(gbm::predict_weights(res.model, res.data.x_row(r))[1], 0.9);
  }
}

TEST(TrainPhase, DegenerateWhenCostsTie) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0, 1);
  std::vector<TimeSeries> ref;
  for (int k = 0; k < 12; ++k) {
    std::vector<double> y;
    for (int t = 0; t < 25; ++t) y.push_back(50 + n(rng));
    ref.emplace_back("c" + std::to_string(k), Frequency::of(FrequencyLabel::yearly), std::move(y), 6);
  }
  // snaive with m = 1 reproduces naive, so every cost row is constant.
  const methods::Pool pool({"naive", "snaive"});
  const auto res = train_phase(ref, pool, gbm::GbmParams{}, PhaseOptions{});
  EXPECT_TRUE(res.model.degenerate_training);
  for (std::size_t r = 0; r < res.data.rows; ++r) {
    for (double v : res.data.x_row(r)) EXPECT_EQ(v, 0.0);
    for (double w : gbm::predict_weights(res.model, res.data.x_row(r))) EXPECT_EQ(w, 0.5);
  }
}

TEST(TrainPhase, DegenerateSeriesExcluded) {
  std::vector<TimeSeries> ref{linear("a", 1, 1, 20), linear("b", 5, 0, 20), linear("c", 2, 3, 20)};
  const auto res = prepare_training(ref, methods::Pool({"naive", "rw_drift"}), PhaseOptions{});
  ASSERT_EQ(res.excluded.size(), 1u);
  EXPECT_EQ(res.excluded[0].series_id, "b");
  EXPECT_EQ(res.excluded[0].kind, "DegenerateScale");
  EXPECT_EQ(res.data.rows, 2u);
}

TEST(TrainPhase, EmptyTrainingSet) {
  std::vector<TimeSeries> ref{linear("b", 5, 0, 20)};
  try {
    train_phase(ref, methods::Pool({"naive", "rw_drift"}), gbm::GbmParams{}, PhaseOptions{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::empty_training_set);
  }
}

TEST(ForecastPhase, IdenticalMethodsGiveCommonForecast) {
  std::vector<TimeSeries> s{linear("a", 3, 2, 15)};
  const methods::Pool pool({"naive", "snaive"});
  gbm::GbmParams p;
  std::vector<TimeSeries> ref{linear("r1", 1, 1, 20), linear("r2", 4, 2, 20)};
  const auto tr = train_phase(ref, methods::Pool({"naive", "rw_drift"}), p, PhaseOptions{});
  auto model = tr.model;
  model.methods = {"naive", "snaive"};
  const auto res = forecast_phase(model, s, pool, PhaseOptions{});
  ASSERT_EQ(res.combined.size(), 1u);
  for (double v : res.features[0].concatenated()) EXPECT_EQ(v, 0.0);
  for (std::size_t h = 0; h < 6; ++h) EXPECT_NEAR(res.combined[0].point[h], 31.0, 1e-12);
}

TEST(ForecastPhase, ZeroRoundModelReproducesSimpleAverage) {
  std::vector<TimeSeries> s{linear("a", 3, 2, 15), linear("b", 9, -0.3, 18)};
  const methods::Pool pool;
  const auto model = gbm::uniform_model(pool.ids(), 56);
  const auto res = forecast_phase(model, s, pool, PhaseOptions{});
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto fm = methods::to_matrix(s[k].id(), res.pool_forecasts[k], 0.95);
    const auto sa = simple_average(fm);
    EXPECT_EQ(res.combined[k].point, sa.point);
    EXPECT_EQ(res.combined[k].upper, sa.upper);
  }
}

TEST(ForecastPhase, Deterministic) {
  std::vector<TimeSeries> ref;
  for (int k = 0; k < 8; ++k) ref.push_back(linear("r" + std::to_string(k), 5 + k, 0.2 * k + (k % 2), 20));
  const methods::Pool pool({"naive", "rw_drift", "theta"});
  gbm::GbmParams p;
  p.rounds = 20;
  auto run = [&](int threads) {
    PhaseOptions o;
    o.threads = threads;
    o.seed = 7;
    const auto tr = train_phase(ref, pool, p, o);
    const auto fp = forecast_phase(tr.model, ref, pool, o);
    std::ostringstream os;
    write_forecasts_csv(os, fp.combined);
    write_weights_csv(os, fp.combined);
    return os.str();
  };
  EXPECT_EQ(run(1), run(3));
}
