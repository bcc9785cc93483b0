#include "divcomb/diversity/diversity.hpp"

#include <fmt/format.h>

#include <ostream>

namespace divcomb::diversity {

double pairwise_div(std::span<const double> f_i, std::span<const double> f_j) {
  if (f_i.size() != f_j.size() || f_i.empty()) {
    throw Error(ErrorKind::length_mismatch, "forecast paths differ in length or are empty");
  }
  double s = 0.0;
  for (std::size_t h = 0; h < f_i.size(); ++h) {
    const double d = f_i[h] - f_j[h];
    s += d * d;
  }
  return s / static_cast<double>(f_i.size());
}

std::vector<std::pair<std::size_t, std::size_t>> pair_order(std::size_t m) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) out.emplace_back(i, j);
  }
  return out;
}

std::vector<double> scaled_div_block(std::span<const double> rows, std::size_t m,
                                     std::size_t horizon) {
  if (m < 2 || rows.size() != m * horizon) {
    throw Error(ErrorKind::length_mismatch, "forecast block must be M x H with M >= 2");
  }
  const auto pairs = pair_order(m);
  std::vector<double> out(pairs.size(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    double s = 0.0;
    for (std::size_t h = 0; h < horizon; ++h) {
      const double d = rows[i * horizon + h] - rows[j * horizon + h];
      s += d * d;
    }
    out[k] = s;
    total += s;
  }
  if (!(total > 0.0)) {
    std::fill(out.begin(), out.end(), 0.0);
    return out;
  }
  for (double& v : out) v /= total;
  return out;
}

std::vector<double> DiversityVector::concatenated() const {
  std::vector<double> out(upper_features);
  out.insert(out.end(), lower_features.begin(), lower_features.end());
  return out;
}

DiversityVector extract_features(const ForecastMatrix& fm) {
  const std::size_t m = fm.method_count();
  const auto h = static_cast<std::size_t>(fm.horizon);
  return DiversityVector{fm.series_id, scaled_div_block(fm.upper, m, h),
                         scaled_div_block(fm.lower, m, h)};
}

std::vector<std::string> feature_names(std::size_t m) {
  std::vector<std::string> names;
  for (const char* prefix : {"u", "l"}) {
    for (const auto& [i, j] : pair_order(m)) names.push_back(fmt::format("{}_{}_{}", prefix, i + 1, j + 1));
  }
  return names;
}

void write_features_csv(std::ostream& out, std::span<const DiversityVector> rows, std::size_t m) {
  out << "series_id";
  for (const auto& name : feature_names(m)) out << ',' << name;
  out << '\n';
  for (const auto& row : rows) {
    out << row.series_id;
    for (double v : row.concatenated()) out << ',' << fmt::format("{}", v);
    out << '\n';
  }
}

}  // namespace divcomb::diversity
