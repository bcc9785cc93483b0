#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include <nlohmann/json.hpp>

#include "divcomb/core/error.hpp"
#include "divcomb/gbm/gbm.hpp"

using namespace divcomb;
using namespace divcomb::gbm;

namespace {

TrainingSet random_set(std::mt19937_64& rng, std::size_t n, std::size_t f, std::size_t m) {
  std::uniform_real_distribution<double> u(0, 1);
  TrainingSet d{n, f, m, {}, {}};
  d.x.resize(n * f);
  d.e.resize(n * m);
  for (auto& v : d.x) v = u(rng);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < m; ++i) {
      // cost depends on the features so trees have something to learn
      d.e[r * m + i] = u(rng) + (d.x[r * f + i % f] > 0.5 ? 0.5 : 0.0) * static_cast<double>(i % 2);
    }
  }
  return d;
}

TrainingSet toy_set() {
  TrainingSet d{40, 3, 2, {}, {}};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (std::size_t r = 0; r < d.rows; ++r) {
    for (std::size_t k = 0; k < d.features; ++k) d.x.push_back(u(rng));
    d.e.push_back(1.0);
    d.e.push_back(0.0);
  }
  return d;
}

double model_loss(const WeightModel& model, const TrainingSet& d) {
  double total = 0;
  for (std::size_t r = 0; r < d.rows; ++r) {
    const auto w = predict_weights(model, d.x_row(r));
    for (std::size_t i = 0; i < d.methods; ++i) total += w[i] * d.e_row(r)[i];
  }
  return total;
}

}  // namespace

TEST(Softmax, Examples) {
  for (double p : softmax(std::vector<double>{0, 0, 0})) EXPECT_NEAR(p, 1.0 / 3, 1e-15);
  const auto two = softmax(std::vector<double>{std::log(2.0), 0});
  EXPECT_NEAR(two[0], 2.0 / 3, 1e-15);
  EXPECT_NEAR(two[1], 1.0 / 3, 1e-15);
  const auto big = softmax(std::vector<double>{1000, 0});
  EXPECT_TRUE(std::isfinite(big[0]) && std::isfinite(big[1]));
  EXPECT_NEAR(big[0], 1.0, 1e-15);
  EXPECT_NEAR(big[1], 0.0, 1e-15);
}

TEST(Loss, Examples) {
  EXPECT_DOUBLE_EQ(loss(std::vector<double>{0, 0}, std::vector<double>{1, 0}, 2), 0.5);
  EXPECT_NEAR(loss(std::vector<double>{-50, 50}, std::vector<double>{1, 0}, 2), 0.0, 1e-12);
  EXPECT_NEAR(loss(std::vector<double>{3, -1, 0.2, 9, 4, -7}, std::vector<double>(6, 2.5), 3), 2 * 2.5, 1e-12);
}

TEST(Gradient, Examples) {
  const auto [g, h] = gradient_hessian(std::vector<double>{0, 0}, std::vector<double>{1, 0});
  EXPECT_DOUBLE_EQ(g[0], 0.25);
  EXPECT_DOUBLE_EQ(g[1], -0.25);
  const auto [g2, h2] = gradient_hessian(std::vector<double>{0.3, -1, 2}, std::vector<double>{4, 4, 4});
  for (double v : g2) EXPECT_NEAR(v, 0.0, 1e-15);
  for (double v : h2) EXPECT_EQ(v, 1e-6);
}

TEST(Gradient, FiniteDifferences) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n(0, 1.5);
  std::uniform_real_distribution<double> u(0, 3);
  const double eps = 1e-5;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t m = 2 + static_cast<std::size_t>(rep % 7);
    std::vector<double> s(m), e(m);
    for (auto& v : s) v = n(rng);
    for (auto& v : e) v = u(rng);
    const auto [g, h] = gradient_hessian(s, e, -1e300);
    for (std::size_t i = 0; i < m; ++i) {
      auto sp = s, sm = s;
      sp[i] += eps;
      sm[i] -= eps;
      const double fd = (loss(sp, e, m) - loss(sm, e, m)) / (2 * eps);
      ASSERT_NEAR(g[i], fd, 1e-7) << rep;
      const auto gp = gradient_hessian(sp, e, -1e300).first[i];
      const auto gm = gradient_hessian(sm, e, -1e300).first[i];
      ASSERT_NEAR(h[i], (gp - gm) / (2 * eps), 1e-6) << rep;
    }
  }
}

TEST(Fit, ToyProblemConcentratesOnBestMethod) {
  const auto d = toy_set();
  GbmParams p;
  p.seed = 3;
  const auto model = fit(d, p, {"a", "b"});
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 2);
  for (int k = 0; k < 20; ++k) {
    std::vector<double> x{u(rng), u(rng), u(rng)};
    EXPECT_GT(predict_weights(model, x)[1], 0.9);
  }
}

TEST(Fit, ZeroRoundsUniform) {
  GbmParams p;
  p.rounds = 0;
  const auto model = fit(toy_set(), p);
  for (double w : predict_weights(model, std::vector<double>{0.1, 0.2, 0.3})) EXPECT_EQ(w, 0.5);
  const auto u = uniform_model({"a", "b", "c", "d"}, 2);
  for (double w : predict_weights(u, std::vector<double>{5, 5})) EXPECT_EQ(w, 0.25);
}

TEST(Fit, DegenerateTrainingIsUniform) {
  auto d = toy_set();
  for (std::size_t r = 0; r < d.rows; ++r) d.e[r * 2] = d.e[r * 2 + 1] = 0.7;
  const auto model = fit(d, GbmParams{});
  EXPECT_TRUE(model.degenerate_training);
  for (double w : predict_weights(model, d.x_row(0))) EXPECT_EQ(w, 0.5);
}

TEST(Fit, TrainingLossBelowUniform) {
  int decreasing = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(seed);
    const auto d = random_set(rng, 60, 6, 4);
    GbmParams p;
    p.rounds = 30;
    p.seed = seed;
    const auto model = fit(d, p);
    const auto& lh = model.loss_history;
    bool ok = !lh.empty() && lh.back() < model_loss(uniform_model({"a", "b", "c", "d"}, 6), d);
    for (std::size_t k = 1; k < lh.size(); ++k) ok = ok && lh[k] <= lh[k - 1] + 1e-12;
    decreasing += ok ? 1 : 0;
  }
  EXPECT_GE(decreasing, 48);
}

// The objective ignores per-row cost shifts; fitted models agree up to split
// ties that rounding can tip either way.
TEST(Fit, ShiftInvarianceOfCosts) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0, 1);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> s(4), e(4), es(4);
    for (std::size_t i = 0; i < 4; ++i) {
      s[i] = n(rng);
      e[i] = std::abs(n(rng));
      es[i] = e[i] + 3.0;
    }
    const auto [g, h] = gradient_hessian(s, e);
    const auto [gs, hs] = gradient_hessian(s, es);
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_NEAR(g[i], gs[i], 1e-12);
      EXPECT_NEAR(h[i], hs[i], 1e-12);
    }
  }
  const auto d = random_set(rng, 50, 4, 3);
  auto shifted = d;
  for (std::size_t r = 0; r < d.rows; ++r) {
    for (std::size_t i = 0; i < 3; ++i) shifted.e[r * 3 + i] += 2.0 * static_cast<double>(r % 5);
  }
  GbmParams p;
  p.rounds = 20;
  const auto a = fit(d, p);
  const auto b = fit(shifted, p);
  for (std::size_t r = 0; r < d.rows; ++r) {
    const auto wa = predict_weights(a, d.x_row(r));
    const auto wb = predict_weights(b, d.x_row(r));
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(wa[i], wb[i], 1e-2);
  }
}

TEST(Fit, DeterministicForSeed) {
  std::mt19937_64 rng(21);
  const auto d = random_set(rng, 80, 5, 3);
  GbmParams p;
  p.rounds = 25;
  p.seed = 99;
  auto p4 = p;
  p4.threads = 4;
  EXPECT_EQ(model_to_json(fit(d, p)).dump(), model_to_json(fit(d, p4)).dump());
}

TEST(Predict, WrongFeatureLength) {
  const auto model = uniform_model({"a", "b"}, 3);
  try {
    predict_weights(model, std::vector<double>{1, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::feature_length_mismatch);
  }
}

TEST(Persistence, RoundTripAndVersion) {
  std::mt19937_64 rng(5);
  const auto d = random_set(rng, 40, 4, 3);
  GbmParams p;
  p.rounds = 10;
  const auto model = fit(d, p, {"x", "y", "z"});
  const auto path = std::filesystem::temp_directory_path() / "divcomb_gbm_roundtrip.json";
  save_model(model, path);
  const auto back = load_model(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.methods, model.methods);
  for (std::size_t r = 0; r < d.rows; ++r) EXPECT_EQ(predict_weights(back, d.x_row(r)), predict_weights(model, d.x_row(r)));

  auto j = model_to_json(model);
  j["format_version"] = 2;
  try {
    model_from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::format_version);
  }
}

TEST(Params, UnknownKeyRejected) {
  nlohmann::json j = GbmParams{};
  j["colsample"] = 0.5;
  EXPECT_THROW(j.get<GbmParams>(), Error);
}
