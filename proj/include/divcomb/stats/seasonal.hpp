#pragma once

#include <span>
#include <vector>

namespace divcomb::stats {

/// Seasonal figure (length m, averaging to 1) of the classical multiplicative
/// decomposition: centred moving-average trend, ratio-to-trend, per-position
/// means. Position i corresponds to t = i, i + m, ... (0-based from the
/// start of x). Needs at least 2m observations.
std::vector<double> multiplicative_seasonal_figure(std::span<const double> x, int m);

/// Additive counterpart: ratio replaced by difference, figure centred on 0.
std::vector<double> additive_seasonal_figure(std::span<const double> x, int m);

/// Seasonal index for 0-based time index t given a figure.
inline double seasonal_index(std::span<const double> figure, std::size_t t) {
  return figure[t % figure.size()];
}

/// 90% ACF-based test for seasonality at lag m. False when m <= 1 or
/// fewer than 3m observations.
bool seasonality_test(std::span<const double> x, int m);

struct StlOptions {
  int seasonal_window = 11;
  int seasonal_degree = 0;
  int trend_window = 0;    // 0: derived from period and seasonal window
  int trend_degree = 1;
  int lowpass_window = 0;  // 0: next odd >= period
  int inner_iterations = 2;
};

struct StlDecomposition {
  std::vector<double> seasonal;
  std::vector<double> trend;
  std::vector<double> remainder;
};

/// Seasonal-trend decomposition by loess (non-robust). Requires n > 2m, m >= 2.
StlDecomposition stl(std::span<const double> x, int m, const StlOptions& options = {});

/// max(0, min(1, 1 - Var(R) / Var(S + R))) from an STL fit.
double seasonal_strength(std::span<const double> x, int m);

/// KPSS level-stationarity statistic with Bartlett lag truncation
/// trunc(3 sqrt(n) / 13).
double kpss_statistic(std::span<const double> x);
/// True when the KPSS test rejects level stationarity at 5% (stat > 0.463).
bool kpss_rejects(std::span<const double> x);

double box_cox(double y, double lambda);
double inverse_box_cox(double z, double lambda);
/// Guerrero's coefficient-of-variation criterion; lambda minimizing it over
/// [lower, upper]. Requires strictly positive data.
double guerrero_lambda(std::span<const double> x, int m, double lower = 0.0,
                       double upper = 1.0);
double guerrero_criterion(std::span<const double> x, int m, double lambda);

}  // namespace divcomb::stats
