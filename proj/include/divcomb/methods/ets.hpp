#pragma once

#include <optional>
#include <string>
#include <vector>

#include "divcomb/methods/method.hpp"

namespace divcomb::methods {

enum class EtsComponent { none, additive, multiplicative };
enum class EtsTrend { none, additive, damped };

struct EtsSpec {
  EtsComponent error = EtsComponent::additive;
  EtsTrend trend = EtsTrend::none;
  EtsComponent season = EtsComponent::none;

  /// "ETS(A,Ad,M)" style label.
  std::string name() const;
  friend bool operator==(const EtsSpec&, const EtsSpec&) = default;
};

struct EtsOptions {
  bool allow_multiplicative = true;
  bool allow_damped = true;
  /// Sample paths for simulated intervals (models outside the linear
  /// additive class).
  int simulation_paths = 2000;
};

/// A fitted innovations state space model.
struct EtsModel {
  EtsSpec spec;
  int period = 1;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double phi = 1.0;
  double initial_level = 0.0;
  double initial_trend = 0.0;
  std::vector<double> initial_season;  // s_{-m} .. s_{-1}
  double level = 0.0;                  // final states
  double trend = 0.0;
  std::vector<double> season;  // circular buffer indexed by t mod m
  std::size_t n = 0;
  double sigma2 = 0.0;
  /// n log(SSE) (+ 2 sum log|mu| for multiplicative errors).
  double criterion = 0.0;
  int parameter_count = 0;
  double aicc = 0.0;
};

/// Information criterion used for model selection.
double ets_aicc(double criterion, int parameter_count, std::size_t n);

/// Fits one candidate. Returns nullopt when the candidate is not admissible
/// for the data (length, positivity) or the optimizer diverges.
std::optional<EtsModel> fit_ets_model(std::span<const double> y, int m, const EtsSpec& spec);

/// All admissible candidates for the data.
std::vector<EtsSpec> ets_candidates(std::span<const double> y, int m,
                                    const EtsOptions& options = {});

/// Lowest-AICc candidate, or nullopt when none converges.
std::optional<EtsModel> select_ets(std::span<const double> y, int m,
                                   const EtsOptions& options = {});

/// Point forecasts and bands from a fitted model: analytic variance for
/// linear additive models, seeded simulation otherwise.
MethodForecast ets_forecast(const EtsModel& model, int horizon, const MethodContext& ctx,
                            const EtsOptions& options = {});

/// Automatic ETS; falls back to naive when no candidate converges.
MethodForecast ets(const TimeSeries& train, int horizon, const MethodContext& ctx);
MethodForecast ets_with_options(const TimeSeries& train, int horizon, const MethodContext& ctx,
                                const EtsOptions& options);

/// Box-Cox (Guerrero lambda over [0, 1]) + ETS, back-transformed. Falls back
/// to ets when any value is nonpositive.
MethodForecast ets_boxcox(const TimeSeries& train, int horizon, const MethodContext& ctx);
/// Same with a fixed lambda.
MethodForecast ets_boxcox_fixed(const TimeSeries& train, int horizon, const MethodContext& ctx,
                                double lambda, const EtsOptions& options = {});

ForecastResult forecast_ets(const TimeSeries& train, int horizon, double level);
ForecastResult forecast_ets_boxcox(const TimeSeries& train, int horizon, double level);

}  // namespace divcomb::methods
