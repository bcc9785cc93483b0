// Writes the bundled 100-series sample in the M4 wide layout.
//   make_sample <out_dir> [seed]
#include <fmt/format.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "divcomb/core/types.hpp"

namespace {

using divcomb::Frequency;
using divcomb::FrequencyLabel;

struct Spec {
  FrequencyLabel label;
  char prefix;
  int count;
  int min_len;
  int max_len;
};

std::vector<double> generate(const Spec& spec, int index, int length, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int m = Frequency::of(spec.label).seasonal_period;
  std::vector<double> y(static_cast<std::size_t>(length));
  const double level0 = 200.0 + 800.0 * unit(rng);
  switch (spec.label) {
    case FrequencyLabel::yearly: {
      // Linear or damped trend with proportional noise.
      const double slope = (unit(rng) - 0.3) * 0.04 * level0;
      const double phi = index % 2 == 0 ? 1.0 : 0.9;
      double level = level0;
      double trend = slope;
      for (auto& v : y) {
        trend *= phi;
        level += trend + 0.02 * level0 * noise(rng);
        v = level;
      }
      break;
    }
    case FrequencyLabel::quarterly:
    case FrequencyLabel::monthly:
    case FrequencyLabel::hourly: {
      // Multiplicative seasonality on a drifting level with AR(1) noise.
      std::vector<double> season(static_cast<std::size_t>(m));
      const double amp = 0.05 + 0.25 * unit(rng);
      const double phase = 2.0 * std::numbers::pi * unit(rng);
      for (int i = 0; i < m; ++i) {
        season[static_cast<std::size_t>(i)] = 1.0 + amp * std::sin(2.0 * std::numbers::pi * i / m + phase);
      }
      const bool seasonal = index % 5 != 0;
      const double drift = (unit(rng) - 0.4) * 0.004 * level0;
      double level = level0;
      double ar = 0.0;
      for (int t = 0; t < length; ++t) {
        level += drift + 0.01 * level0 * noise(rng);
        ar = 0.5 * ar + 0.02 * level0 * noise(rng);
        const double s = seasonal ? season[static_cast<std::size_t>(t % m)] : 1.0;
        y[static_cast<std::size_t>(t)] = level * s + ar;
      }
      break;
    }
    case FrequencyLabel::weekly:
    case FrequencyLabel::daily: {
      // Random walk, with drift for odd indices.
      const double drift = index % 2 == 1 ? 0.002 * level0 : 0.0;
      double level = level0;
      for (auto& v : y) {
        level += drift + 0.01 * level0 * noise(rng);
        v = level;
      }
      break;
    }
  }
  for (auto& v : y) v = std::max(v, 1.0);
  return y;
}

std::string fmt_value(double v) { return fmt::format("{:.3f}", v); }

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: make_sample <out_dir> [seed]\n";
    return 1;
  }
  const std::filesystem::path dir(argv[1]);
  const std::uint64_t seed = argc > 2 ? std::stoull(argv[2]) : 20241016ull;
  std::filesystem::create_directories(dir);
  const std::vector<Spec> specs{{FrequencyLabel::yearly, 'Y', 20, 25, 45},
                                {FrequencyLabel::quarterly, 'Q', 25, 40, 80},
                                {FrequencyLabel::monthly, 'M', 35, 80, 160},
                                {FrequencyLabel::weekly, 'W', 10, 80, 160},
                                {FrequencyLabel::daily, 'D', 10, 100, 200}};
  std::mt19937_64 rng(seed);
  for (const auto& spec : specs) {
    const int horizon = Frequency::of(spec.label).default_horizon;
    const auto stem = std::string(divcomb::frequency_file_stem(spec.label));
    std::ofstream train(dir / (stem + "-train.csv"), std::ios::binary);
    std::ofstream test(dir / (stem + "-test.csv"), std::ios::binary);
    std::uniform_int_distribution<int> len(spec.min_len, spec.max_len);
    std::vector<std::vector<double>> all;
    std::size_t widest = 0;
    for (int i = 0; i < spec.count; ++i) {
      all.push_back(generate(spec, i, len(rng) + horizon, rng));
      widest = std::max(widest, all.back().size() - static_cast<std::size_t>(horizon));
    }
    train << "\"V1\"";
    for (std::size_t c = 2; c <= widest + 1; ++c) train << ",\"V" << c << '"';
    train << '\n';
    test << "\"V1\"";
    for (int c = 2; c <= horizon + 1; ++c) test << ",\"V" << c << '"';
    test << '\n';
    for (int i = 0; i < spec.count; ++i) {
      const auto& y = all[static_cast<std::size_t>(i)];
      const std::string id = fmt::format("\"{}{}\"", spec.prefix, i + 1);
      const std::size_t n_train = y.size() - static_cast<std::size_t>(horizon);
      train << id;
      for (std::size_t t = 0; t < widest; ++t) train << ',' << (t < n_train ? fmt_value(y[t]) : "");
      train << '\n';
      test << id;
      for (std::size_t t = n_train; t < y.size(); ++t) test << ',' << fmt_value(y[t]);
      test << '\n';
    }
  }
  std::cout << "sample written to " << dir.string() << '\n';
  return 0;
}
