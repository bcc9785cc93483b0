#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace divcomb::eval {

/// Per-series MASE/MSIS of one approach (a pool method, SA or the
/// diversity combination).
struct ApproachScores {
  std::string approach;
  std::vector<std::string> series_ids;
  std::vector<std::string> frequencies;
  std::vector<double> mase;
  std::vector<double> msis;
};

struct SummaryRow {
  std::string approach;
  std::string frequency;  // "overall" for the all-series row
  std::size_t n = 0;
  double mean_mase = 0.0;
  double mean_msis = 0.0;
};

/// Mean MASE and MSIS per approach and frequency, plus an overall row that
/// averages across series. Throws Error(misaligned_series) when approaches
/// cover different series.
std::vector<SummaryRow> summarize(std::span<const ApproachScores> approaches);

/// Upper 1 - alpha quantile of the studentized range with K groups and
/// infinite degrees of freedom. alpha in {0.01, 0.05, 0.10}, 2 <= K <= 20;
/// throws Error(unsupported_k) otherwise.
double studentized_range_q(double alpha, std::size_t k);

struct MethodRanks {
  std::vector<std::string> methods;
  std::size_t n = 0;
  double alpha = 0.05;
  std::vector<double> ranks;       // N x K, ties averaged
  std::vector<double> mean_ranks;  // K
  double half_width = 0.0;

  double lower(std::size_t i) const { return mean_ranks[i] - half_width; }
  double upper(std::size_t i) const { return mean_ranks[i] + half_width; }
  /// Disjoint intervals.
  bool differs(std::size_t i, std::size_t j) const;
  std::size_t best() const;
};

/// Multiple comparisons with the best on per-series ranks of an N x K
/// row-major error matrix.
MethodRanks mcb_test(std::span<const double> errors, std::size_t n, std::size_t k,
                     double alpha = 0.05, std::vector<std::string> methods = {});

/// Confidence levels of the trade-off study.
const std::vector<double>& tradeoff_levels();

struct TradeoffInput {
  std::string method;
  std::vector<double> levels;
  /// upper[level][series] -> horizon vector
  std::vector<std::vector<std::vector<double>>> upper;
};

struct TradeoffCurve {
  std::string method;
  std::vector<double> levels;
  std::vector<double> coverage;
  std::vector<double> scaled_pi;
  std::size_t excluded = 0;
};

/// One (upper coverage, mean scaled upper PI) point per level. Series with a
/// nonpositive history mean are excluded from both and counted.
TradeoffCurve tradeoff(const TradeoffInput& input, std::span<const std::vector<double>> train,
                       std::span<const std::vector<double>> actuals);

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows);
void write_mcb_csv(std::ostream& out, const MethodRanks& ranks);
void write_tradeoff_csv(std::ostream& out, std::span<const TradeoffCurve> curves);
std::string mcb_svg(const MethodRanks& ranks, const std::string& title);
std::string tradeoff_svg(std::span<const TradeoffCurve> curves, const std::string& title);

/// Writes mcb_<tag>.csv/.svg (when ranks are given) and tradeoff_<tag>.csv/.svg
/// (when curves are non-empty). Returns the paths written.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& dir,
                                              const std::string& tag, const MethodRanks* ranks,
                                              std::span<const TradeoffCurve> curves,
                                              const std::string& manifest_hash = {});

}  // namespace divcomb::eval
