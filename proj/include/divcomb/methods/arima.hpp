#pragma once

#include <optional>
#include <string>
#include <vector>

#include "divcomb/methods/method.hpp"

namespace divcomb::methods {

struct ArimaOrder {
  int p = 0;
  int d = 0;
  int q = 0;
  int P = 0;
  int D = 0;
  int Q = 0;
  int period = 1;
  bool constant = false;

  /// "ARIMA(p,d,q)(P,D,Q)[m] with constant" style label.
  std::string name() const;
  friend bool operator==(const ArimaOrder&, const ArimaOrder&) = default;
};

enum class ArimaFitMethod {
  conditional_sum_of_squares,
  /// CSS start values refined by exact Gaussian maximum likelihood (Kalman filter).
  css_then_ml,
};

struct ArimaModel {
  ArimaOrder order;
  std::vector<double> ar;   // phi_1..phi_p
  std::vector<double> ma;   // theta_1..theta_q
  std::vector<double> sar;  // Phi_1..Phi_P
  std::vector<double> sma;  // Theta_1..Theta_Q
  double mean = 0.0;        // mean of the differenced series (0 without constant)
  double sigma2 = 0.0;
  double loglik = 0.0;
  double aicc = 0.0;
  std::size_t n_used = 0;  // length of the differenced series
  bool ml_refined = false;
};

/// Number of differences suggested by repeated KPSS tests (max 2).
int kpss_differences(std::span<const double> x, int max_d = 2);
/// Seasonal differences (0 or 1): 1 when the STL seasonal strength exceeds 0.64.
int seasonal_differences(std::span<const double> x, int m);

/// Fits one order. Returns nullopt when the data are too short, the fit is
/// non-finite or the estimated polynomials are not stationary/invertible.
std::optional<ArimaModel> fit_arima(std::span<const double> y, const ArimaOrder& order,
                                    ArimaFitMethod method);

struct AutoArimaOptions {
  int max_p = 5;
  int max_q = 5;
  int max_P = 2;
  int max_Q = 2;
  int max_order = 5;
  int max_models = 94;
};

/// Hyndman-Khandakar stepwise search by AICc over CSS fits, then CSS-ML
/// refit of the winner.
std::optional<ArimaModel> select_arima(std::span<const double> y, int m,
                                       const AutoArimaOptions& options = {});

/// Point forecasts (re-integrated) and psi-weight standard deviations.
void arima_forecast(const ArimaModel& model, std::span<const double> y, int horizon,
                    std::vector<double>& point, std::vector<double>& sd);

/// Automatic ARIMA; falls back to rw_drift when no order converges.
MethodForecast auto_arima(const TimeSeries& train, int horizon, const MethodContext& ctx);

ForecastResult forecast_auto_arima(const TimeSeries& train, int horizon, double level);

}  // namespace divcomb::methods
