#include "divcomb/combiner/combiner.hpp"

#include <fmt/format.h>

#include <cmath>
#include <ostream>
#include <optional>

#include "divcomb/core/parallel.hpp"

namespace divcomb::combiner {

CombinedForecast combine(const ForecastMatrix& fm, std::span<const double> weights) {
  const std::size_t m = fm.method_count();
  if (weights.size() != m) {
    throw Error(ErrorKind::weight_length_mismatch,
                fmt::format("{} weights for {} methods", weights.size(), m));
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorKind::non_simplex_weights, "negative or non-finite weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorKind::non_simplex_weights, fmt::format("weights sum to {}", sum));
  }
  const auto h = static_cast<std::size_t>(fm.horizon);
  CombinedForecast out{fm.series_id, fm.methods, std::vector<double>(weights.begin(), weights.end()),
                       fm.level, std::vector<double>(h, 0.0), std::vector<double>(h, 0.0),
                       std::vector<double>(h, 0.0)};
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < h; ++k) {
      out.point[k] += weights[i] * fm.point[i * h + k];
      out.lower[k] += weights[i] * fm.lower[i * h + k];
      out.upper[k] += weights[i] * fm.upper[i * h + k];
    }
  }
  return out;
}

CombinedForecast simple_average(const ForecastMatrix& fm) {
  const std::size_t m = fm.method_count();
  const auto h = static_cast<std::size_t>(fm.horizon);
  CombinedForecast out{fm.series_id, fm.methods,
                       std::vector<double>(m, 1.0 / static_cast<double>(m)), fm.level,
                       std::vector<double>(h, 0.0), std::vector<double>(h, 0.0),
                       std::vector<double>(h, 0.0)};
  for (std::size_t k = 0; k < h; ++k) {
    double p = 0.0;
    double lo = 0.0;
    double up = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      p += fm.point[i * h + k];
      lo += fm.lower[i * h + k];
      up += fm.upper[i * h + k];
    }
    out.point[k] = p / static_cast<double>(m);
    out.lower[k] = lo / static_cast<double>(m);
    out.upper[k] = up / static_cast<double>(m);
  }
  return out;
}

std::uint64_t series_seed(std::uint64_t seed, const std::string& series_id) {
  return seed ^ fnv1a64(series_id);
}

std::vector<double> feature_row(const diversity::DiversityVector& dv, const PhaseOptions& options) {
  std::vector<double> row = dv.concatenated();
  if (options.external != nullptr) {
    const auto it = options.external->rows.find(dv.series_id);
    if (it == options.external->rows.end()) {
      throw Error(ErrorKind::missing_test_row, "no external features for " + dv.series_id);
    }
    if (it->second.size() != options.external->names.size()) {
      throw Error(ErrorKind::feature_length_mismatch, "external feature row has wrong width");
    }
    row.insert(row.end(), it->second.begin(), it->second.end());
  }
  return row;
}

namespace {

methods::MethodContext context_for(const PhaseOptions& options, const std::string& id) {
  methods::MethodContext ctx;
  ctx.levels = {options.level};
  for (double l : options.extra_levels) {
    if (l != options.level) ctx.levels.push_back(l);
  }
  ctx.seed = series_seed(options.seed, id);
  return ctx;
}

SeriesFailure failure_from(const std::string& id, const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    return {id, std::string(error_kind_name(err->kind())), err->what()};
  }
  return {id, "internal", e.what()};
}

}  // namespace

TrainingResult prepare_training(std::span<const TimeSeries> reference, const methods::Pool& pool,
                                const PhaseOptions& options) {
  struct Row {
    std::optional<ForecastMatrix> fm;
    diversity::DiversityVector dv;
    metrics::SeriesScores scores;
    std::vector<double> x;
    std::optional<SeriesFailure> failure;
  };
  std::vector<Row> rows(reference.size());
  parallel_for(reference.size(), options.threads, [&](std::size_t n) {
    const TimeSeries& s = reference[n];
    Row& row = rows[n];
    try {
      const SplitSeries parts = split(s);
      methods::MethodContext ctx = context_for(options, s.id());
      ctx.levels = {options.level};
      const auto fc = pool.forecast_all(parts.train, s.horizon(), ctx);
      ForecastMatrix fm = methods::to_matrix(s.id(), fc, options.level);
      row.scores = metrics::score_matrix(parts.train.values(), parts.test_actuals, fm, s.period(),
                                         1.0 - options.level);
      row.dv = diversity::extract_features(fm);
      row.x = feature_row(row.dv, options);
      row.fm = std::move(fm);
    } catch (const std::exception& e) {
      row.failure = failure_from(s.id(), e);
    }
  });

  TrainingResult out;
  out.errors.method_ids = pool.ids();
  out.data.methods = pool.size();
  out.data.features = pool.size() * (pool.size() - 1) +
                      (options.external != nullptr ? options.external->names.size() : 0);
  for (auto& row : rows) {
    if (row.failure) {
      out.excluded.push_back(std::move(*row.failure));
      continue;
    }
    out.errors.append(row.dv.series_id, row.scores);
    out.data.x.insert(out.data.x.end(), row.x.begin(), row.x.end());
    out.data.e.insert(out.data.e.end(), row.scores.err.begin(), row.scores.err.end());
    ++out.data.rows;
    out.features.push_back(std::move(row.dv));
    out.matrices.push_back(std::move(*row.fm));
  }
  return out;
}

TrainingResult train_phase(std::span<const TimeSeries> reference, const methods::Pool& pool,
                           const gbm::GbmParams& params, const PhaseOptions& options) {
  if (reference.empty()) throw Error(ErrorKind::empty_training_set, "no reference series");
  TrainingResult out = prepare_training(reference, pool, options);
  if (out.data.rows == 0) {
    throw Error(ErrorKind::empty_training_set,
                fmt::format("all {} reference series were excluded", reference.size()));
  }
  gbm::GbmParams p = params;
  p.threads = std::max(p.threads, 1);
  out.model = gbm::fit(out.data, p, pool.ids());
  return out;
}

ForecastPhaseResult forecast_phase(const gbm::WeightModel& model,
                                   std::span<const TimeSeries> series, const methods::Pool& pool,
                                   const PhaseOptions& options) {
  if (model.methods != pool.ids()) {
    throw Error(ErrorKind::invalid_argument, "model was trained for a different method pool");
  }
  const std::size_t expected = pool.size() * (pool.size() - 1) +
                               (options.external != nullptr ? options.external->names.size() : 0);
  if (model.feature_count != expected) {
    throw Error(ErrorKind::feature_length_mismatch,
                fmt::format("model expects {} features, pool layout gives {}", model.feature_count, expected));
  }
  struct Row {
    std::optional<CombinedForecast> combined;
    std::vector<methods::MethodForecast> pool_output;
    diversity::DiversityVector dv;
    std::optional<SeriesFailure> failure;
  };
  std::vector<Row> rows(series.size());
  parallel_for(series.size(), options.threads, [&](std::size_t n) {
    const TimeSeries& s = series[n];
    Row& row = rows[n];
    try {
      const auto ctx = context_for(options, s.id());
      row.pool_output = pool.forecast_all(s, s.horizon(), ctx);
      const ForecastMatrix fm = methods::to_matrix(s.id(), row.pool_output, options.level);
      row.dv = diversity::extract_features(fm);
      const auto weights = gbm::predict_weights(model, feature_row(row.dv, options));
      row.combined = combine(fm, weights);
    } catch (const std::exception& e) {
      row.failure = failure_from(s.id(), e);
    }
  });
  ForecastPhaseResult out;
  for (auto& row : rows) {
    if (row.failure) {
      out.failures.push_back(std::move(*row.failure));
      continue;
    }
    out.combined.push_back(std::move(*row.combined));
    out.pool_forecasts.push_back(std::move(row.pool_output));
    out.features.push_back(std::move(row.dv));
  }
  return out;
}

CombinedForecast combine_at(const std::string& series_id,
                            std::span<const methods::MethodForecast> pool_output,
                            std::span<const double> weights, double level) {
  return combine(methods::to_matrix(series_id, pool_output, level), weights);
}

void write_forecasts_csv(std::ostream& out, std::span<const CombinedForecast> rows) {
  out << "series_id,step,point,lower,upper\n";
  for (const auto& r : rows) {
    for (std::size_t h = 0; h < r.point.size(); ++h) {
      out << fmt::format("{},{},{},{},{}\n", r.series_id, h + 1, r.point[h], r.lower[h], r.upper[h]);
    }
  }
}

void write_weights_csv(std::ostream& out, std::span<const CombinedForecast> rows) {
  out << "series_id,method_id,weight\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.weights.size(); ++i) {
      out << fmt::format("{},{},{}\n", r.series_id, r.methods[i], r.weights[i]);
    }
  }
}

}  // namespace divcomb::combiner
