#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "divcomb/diversity/diversity.hpp"
#include "divcomb/gbm/gbm.hpp"
#include "divcomb/methods/pool.hpp"
#include "divcomb/metrics/metrics.hpp"

namespace divcomb::combiner {

struct CombinedForecast {
  std::string series_id;
  std::vector<std::string> methods;
  std::vector<double> weights;
  double level = 0.95;
  std::vector<double> point;
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Weighted sums of the pool rows. Throws Error(weight_length_mismatch) or
/// Error(non_simplex_weights) (sum off by more than 1e-9, or a negative weight).
CombinedForecast combine(const ForecastMatrix& fm, std::span<const double> weights);

/// Equal-weight benchmark computed as the plain row mean.
CombinedForecast simple_average(const ForecastMatrix& fm);

/// Extra per-series features appended after the diversity block.
struct ExternalFeatures {
  std::vector<std::string> names;
  std::map<std::string, std::vector<double>> rows;
};

struct PhaseOptions {
  double level = 0.95;
  /// Additional levels to produce pool bands for (trade-off curves).
  std::vector<double> extra_levels;
  int threads = 1;
  std::uint64_t seed = 0;
  const ExternalFeatures* external = nullptr;
};

/// Seed handed to the pool for one series.
std::uint64_t series_seed(std::uint64_t seed, const std::string& series_id);

struct SeriesFailure {
  std::string series_id;
  std::string kind;
  std::string message;
};

/// Feature row (diversity followed by external features) for one matrix.
std::vector<double> feature_row(const diversity::DiversityVector& dv, const PhaseOptions& options);

struct TrainingResult {
  gbm::WeightModel model;
  gbm::TrainingSet data;
  metrics::ErrorMatrix errors;
  std::vector<diversity::DiversityVector> features;
  std::vector<ForecastMatrix> matrices;
  std::vector<SeriesFailure> excluded;
};

/// Phase 1 up to the training set: split, pool forecasts on the training
/// part, features and costs against the held-out actuals. Series with a
/// degenerate scale or benchmark are excluded and reported.
TrainingResult prepare_training(std::span<const TimeSeries> reference, const methods::Pool& pool,
                                const PhaseOptions& options);

/// prepare_training followed by gbm::fit. Throws Error(empty_training_set)
/// when every series is excluded.
TrainingResult train_phase(std::span<const TimeSeries> reference, const methods::Pool& pool,
                           const gbm::GbmParams& params, const PhaseOptions& options);

struct ForecastPhaseResult {
  std::vector<CombinedForecast> combined;
  /// Pool output per series (all requested levels), aligned with combined.
  std::vector<std::vector<methods::MethodForecast>> pool_forecasts;
  std::vector<diversity::DiversityVector> features;
  std::vector<SeriesFailure> failures;
};

/// Phase 2: pool on the full history over each series' horizon, weights
/// from the model, combination. Failing series are reported and skipped.
ForecastPhaseResult forecast_phase(const gbm::WeightModel& model,
                                   std::span<const TimeSeries> series, const methods::Pool& pool,
                                   const PhaseOptions& options);

/// Combination of stored pool output at another level with given weights.
CombinedForecast combine_at(const std::string& series_id,
                            std::span<const methods::MethodForecast> pool_output,
                            std::span<const double> weights, double level);

/// series_id,step,point,lower,upper
void write_forecasts_csv(std::ostream& out, std::span<const CombinedForecast> rows);
/// series_id,method_id,weight
void write_weights_csv(std::ostream& out, std::span<const CombinedForecast> rows);

}  // namespace divcomb::combiner
