#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "divcomb/core/types.hpp"

namespace divcomb::diversity {

/// Mean squared difference between two forecast paths.
/// Throws Error(length_mismatch) on unequal or empty inputs.
double pairwise_div(std::span<const double> f_i, std::span<const double> f_j);

/// Pairs (i, j), i < j, in lexicographic order.
std::vector<std::pair<std::size_t, std::size_t>> pair_order(std::size_t m);

/// Scaled diversity of every pair of rows of a row-major M x H matrix. The
/// block sums to one, or is all zeros when every pair coincides.
std::vector<double> scaled_div_block(std::span<const double> rows, std::size_t m,
                                     std::size_t horizon);

struct DiversityVector {
  std::string series_id;
  std::vector<double> upper_features;
  std::vector<double> lower_features;

  /// upper block followed by lower block.
  std::vector<double> concatenated() const;
};

DiversityVector extract_features(const ForecastMatrix& fm);

/// "u_1_2", ..., "l_7_8" (1-based method positions).
std::vector<std::string> feature_names(std::size_t m);

/// Header plus one row per series.
void write_features_csv(std::ostream& out, std::span<const DiversityVector> rows, std::size_t m);

}  // namespace divcomb::diversity
