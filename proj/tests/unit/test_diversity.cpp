#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "divcomb/diversity/diversity.hpp"

using namespace divcomb;
using namespace divcomb::diversity;

namespace {

ForecastMatrix matrix(std::size_t m, std::size_t h, std::vector<double> lower, std::vector<double> upper) {
  ForecastMatrix fm;
  fm.series_id = "s";
  for (std::size_t i = 0; i < m; ++i) fm.methods.push_back("m" + std::to_string(i));
  fm.horizon = static_cast<int>(h);
  fm.point.resize(m * h);
  for (std::size_t k = 0; k < m * h; ++k) fm.point[k] = 0.5 * (lower[k] + upper[k]);
  fm.lower = std::move(lower);
  fm.upper = std::move(upper);
  return fm;
}

}  // namespace

TEST(PairwiseDiv, Examples) {
  EXPECT_DOUBLE_EQ(pairwise_div(std::vector<double>{1, 1}, std::vector<double>{3, 3}), 4.0);
  EXPECT_DOUBLE_EQ(pairwise_div(std::vector<double>{2, 7}, std::vector<double>{2, 7}), 0.0);
  EXPECT_DOUBLE_EQ(pairwise_div(std::vector<double>{0}, std::vector<double>{2}), 4.0);
  EXPECT_THROW(pairwise_div(std::vector<double>{0}, std::vector<double>{2, 3}), Error);
  EXPECT_THROW(pairwise_div(std::vector<double>{}, std::vector<double>{}), Error);
}

TEST(ScaledDivBlock, Examples) {
  const auto b = scaled_div_block(std::vector<double>{0, 0, 1, 1, 2, 2}, 3, 2);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_NEAR(b[0], 1.0 / 6, 1e-15);
  EXPECT_NEAR(b[1], 2.0 / 3, 1e-15);
  EXPECT_NEAR(b[2], 1.0 / 6, 1e-15);
  EXPECT_EQ(scaled_div_block(std::vector<double>{4, 4, 4, 4, 4, 4}, 3, 2), (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(scaled_div_block(std::vector<double>{1, 9}, 2, 1), (std::vector<double>{1.0}));
}

TEST(PairOrder, Lexicographic) {
  const auto p = pair_order(4);
  ASSERT_EQ(p.size(), 6u);
  EXPECT_EQ(p[0], (std::pair<std::size_t, std::size_t>{0, 1}));
  EXPECT_EQ(p[2], (std::pair<std::size_t, std::size_t>{0, 3}));
  EXPECT_EQ(p[5], (std::pair<std::size_t, std::size_t>{2, 3}));
}

TEST(ExtractFeatures, Examples) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> lo(8 * 6), hi(8 * 6);
  for (auto& v : lo) v = n(rng);
  for (std::size_t k = 0; k < hi.size(); ++k) hi[k] = lo[k] + 1 + std::abs(n(rng));
  const auto v = extract_features(matrix(8, 6, lo, hi)).concatenated();
  EXPECT_EQ(v.size(), 56u);

  const auto same = extract_features(matrix(8, 3, std::vector<double>(24, 1.0), std::vector<double>(24, 2.0)));
  for (double x : same.concatenated()) EXPECT_EQ(x, 0.0);

  const auto two = extract_features(matrix(2, 2, {0, 0, 0, 0}, {1, 1, 3, 3})).concatenated();
  EXPECT_EQ(two, (std::vector<double>{1.0, 0.0}));
}

TEST(ExtractFeatures, Names) {
  const auto names = feature_names(8);
  ASSERT_EQ(names.size(), 56u);
  EXPECT_EQ(names.front(), "u_1_2");
  EXPECT_EQ(names[27], "u_7_8");
  EXPECT_EQ(names[28], "l_1_2");
  EXPECT_EQ(names.back(), "l_7_8");
}

// Ambiguity decomposition: with simplex weights w and c = sum_i w_i f_i,
// MSE(c, y) = sum_i w_i MSE(f_i, y) - sum_{i<j} w_i w_j Div_ij.
TEST(Diversity, AmbiguityIdentity) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n(0, 3);
  std::exponential_distribution<double> ex(1.0);
  std::uniform_int_distribution<int> mdist(2, 9), hdist(1, 18);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto m = static_cast<std::size_t>(mdist(rng));
    const auto h = static_cast<std::size_t>(hdist(rng));
    std::vector<std::vector<double>> f(m, std::vector<double>(h));
    std::vector<double> y(h), w(m), c(h, 0.0);
    double total = 0;
    for (auto& v : w) total += (v = ex(rng));
    for (auto& v : w) v /= total;
    for (auto& v : y) v = n(rng);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < h; ++k) {
        f[i][k] = n(rng);
        c[k] += w[i] * f[i][k];
      }
    }
    double weighted_mse = 0, div_term = 0;
    for (std::size_t i = 0; i < m; ++i) weighted_mse += w[i] * pairwise_div(f[i], y);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) div_term += w[i] * w[j] * pairwise_div(f[i], f[j]);
    }
    ASSERT_LT(std::abs(pairwise_div(c, y) - (weighted_mse - div_term)), 1e-9) << rep;
  }
}

TEST(Diversity, ScaleInvariance) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0, 1);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> lo(4 * 5), hi(4 * 5);
    for (auto& v : lo) v = n(rng);
    for (std::size_t k = 0; k < hi.size(); ++k) hi[k] = lo[k] + std::abs(n(rng));
    const double c = std::exp(n(rng) * 3);
    auto lo2 = lo, hi2 = hi;
    for (auto& v : lo2) v *= c;
    for (auto& v : hi2) v *= c;
    const auto a = extract_features(matrix(4, 5, lo, hi)).concatenated();
    const auto b = extract_features(matrix(4, 5, lo2, hi2)).concatenated();
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
  }
}

TEST(Diversity, PermutationConsistency) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0, 1);
  const std::size_t m = 5, h = 4;
  std::vector<double> rows(m * h);
  for (auto& v : rows) v = n(rng);
  std::vector<std::size_t> perm{3, 0, 4, 1, 2};
  std::vector<double> permuted(m * h);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(rows.begin() + static_cast<long>(perm[i] * h), h, permuted.begin() + static_cast<long>(i * h));
  }
  const auto a = scaled_div_block(rows, m, h);
  const auto b = scaled_div_block(permuted, m, h);
  const auto pairs = pair_order(m);
  auto index_of = [&](std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    return static_cast<std::size_t>(std::find(pairs.begin(), pairs.end(), std::pair{i, j}) - pairs.begin());
  };
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    EXPECT_NEAR(b[k], a[index_of(perm[i], perm[j])], 1e-15);
  }
}

TEST(Diversity, FeaturesCsv) {
  DiversityVector v{"s1", {1.0}, {0.0}};
  std::ostringstream os;
  write_features_csv(os, std::span(&v, 1), 2);
  EXPECT_EQ(os.str(), "series_id,u_1_2,l_1_2\ns1,1,0\n");
}
