#include "divcomb/methods/ets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "divcomb/methods/simple.hpp"
#include "divcomb/stats/basic.hpp"
#include "divcomb/stats/optim.hpp"
#include "divcomb/stats/seasonal.hpp"

namespace divcomb::methods {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

char component_letter(EtsComponent c) {
  switch (c) {
    case EtsComponent::none: return 'N';
    case EtsComponent::additive: return 'A';
    case EtsComponent::multiplicative: return 'M';
  }
  return '?';
}

struct Smoothing {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double phi = 1.0;
  double level = 0.0;
  double trend = 0.0;
};

struct FilterOutput {
  double sse = 0.0;
  double log_mu = 0.0;
  double level = 0.0;
  double trend = 0.0;
  std::vector<double> season;
  bool ok = true;
};

bool has_trend(const EtsSpec& s) { return s.trend != EtsTrend::none; }
bool has_season(const EtsSpec& s) { return s.season != EtsComponent::none; }

// Forecast mean for the next step given current states; `lb` receives the
// level-plus-damped-trend term.
double one_step(const EtsSpec& spec, double level, double trend, double phi, double s_old,
                double& lb) {
  lb = level + (has_trend(spec) ? phi * trend : 0.0);
  switch (spec.season) {
    case EtsComponent::additive: return lb + s_old;
    case EtsComponent::multiplicative: return lb * s_old;
    case EtsComponent::none: return lb;
  }
  return lb;
}

// State update given the innovation e (absolute for additive errors, relative
// for multiplicative errors).
void update(const EtsSpec& spec, const Smoothing& p, double mu, double lb, double e,
            double& level, double& trend, double& s_slot) {
  const double s_old = s_slot;
  const double phib = has_trend(spec) ? p.phi * trend : 0.0;
  if (spec.error == EtsComponent::additive) {
    switch (spec.season) {
      case EtsComponent::none:
        level = lb + p.alpha * e;
        trend = phib + p.beta * e;
        break;
      case EtsComponent::additive:
        level = lb + p.alpha * e;
        trend = phib + p.beta * e;
        s_slot = s_old + p.gamma * e;
        break;
      case EtsComponent::multiplicative:
        level = lb + p.alpha * e / s_old;
        trend = phib + p.beta * e / s_old;
        s_slot = s_old + p.gamma * e / lb;
        break;
    }
  } else {
    switch (spec.season) {
      case EtsComponent::none:
        level = lb * (1.0 + p.alpha * e);
        trend = phib + p.beta * lb * e;
        break;
      case EtsComponent::additive:
        level = lb + p.alpha * mu * e;
        trend = phib + p.beta * mu * e;
        s_slot = s_old + p.gamma * mu * e;
        break;
      case EtsComponent::multiplicative:
        level = lb * (1.0 + p.alpha * e);
        trend = phib + p.beta * lb * e;
        s_slot = s_old * (1.0 + p.gamma * e);
        break;
    }
  }
  if (!has_trend(spec)) trend = 0.0;
}

bool needs_positive_mean(const EtsSpec& spec) {
  return spec.error == EtsComponent::multiplicative ||
         spec.season == EtsComponent::multiplicative;
}

FilterOutput run_filter(std::span<const double> y, int m, const EtsSpec& spec,
                        const Smoothing& p, std::span<const double> initial_season) {
  FilterOutput out;
  double level = p.level;
  double trend = has_trend(spec) ? p.trend : 0.0;
  std::vector<double> season(initial_season.begin(), initial_season.end());
  if (season.empty()) season.assign(1, spec.season == EtsComponent::multiplicative ? 1.0 : 0.0);
  const std::size_t period = has_season(spec) ? static_cast<std::size_t>(m) : 1;
  for (std::size_t t = 0; t < y.size(); ++t) {
    double& slot = season[t % period];
    double lb = 0.0;
    const double mu = one_step(spec, level, trend, p.phi, slot, lb);
    if (needs_positive_mean(spec) && (!(mu > 0.0) || !(lb > 0.0))) {
      out.ok = false;
      return out;
    }
    const double e = spec.error == EtsComponent::additive ? y[t] - mu : (y[t] - mu) / mu;
    out.sse += e * e;
    if (spec.error == EtsComponent::multiplicative) out.log_mu += std::log(std::abs(mu));
    update(spec, p, mu, lb, e, level, trend, slot);
    if (!std::isfinite(level) || !std::isfinite(trend)) {
      out.ok = false;
      return out;
    }
  }
  out.level = level;
  out.trend = trend;
  out.season = std::move(season);
  return out;
}

double sse_floor(std::span<const double> y, const EtsSpec& spec) {
  if (spec.error == EtsComponent::multiplicative) return 1e-20 * static_cast<double>(y.size());
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  return 1e-20 * static_cast<double>(y.size()) * std::max(1.0, scale * scale);
}

double criterion_of(std::span<const double> y, const EtsSpec& spec, const FilterOutput& f) {
  const double n = static_cast<double>(y.size());
  const double sse = std::max(f.sse, sse_floor(y, spec));
  double value = n * std::log(sse);
  if (spec.error == EtsComponent::multiplicative) value += 2.0 * f.log_mu;
  return value;
}

int seasonal_state_count(const EtsSpec& spec, int m) { return has_season(spec) ? m - 1 : 0; }

}  // namespace

std::string EtsSpec::name() const {
  std::string t = trend == EtsTrend::none ? "N" : (trend == EtsTrend::additive ? "A" : "Ad");
  return std::string("ETS(") + component_letter(error) + "," + t + "," +
         component_letter(season) + ")";
}

double ets_aicc(double criterion, int parameter_count, std::size_t n) {
  const double k = parameter_count;
  const double nn = static_cast<double>(n);
  if (nn - k - 1.0 <= 0.0) return kInf;
  return criterion + 2.0 * k + 2.0 * k * (k + 1.0) / (nn - k - 1.0);
}

std::vector<EtsSpec> ets_candidates(std::span<const double> y, int m,
                                    const EtsOptions& options) {
  const bool positive =
      !y.empty() && *std::min_element(y.begin(), y.end()) > 0.0 && options.allow_multiplicative;
  const bool seasonal_ok = m > 1 && y.size() >= 2 * static_cast<std::size_t>(m) + 3;
  std::vector<EtsSpec> out;
  for (EtsComponent error : {EtsComponent::additive, EtsComponent::multiplicative}) {
    if (error == EtsComponent::multiplicative && !positive) continue;
    for (EtsTrend trend : {EtsTrend::none, EtsTrend::additive, EtsTrend::damped}) {
      if (trend == EtsTrend::damped && !options.allow_damped) continue;
      for (EtsComponent season :
           {EtsComponent::none, EtsComponent::additive, EtsComponent::multiplicative}) {
        if (season != EtsComponent::none && !seasonal_ok) continue;
        if (season == EtsComponent::multiplicative && !positive) continue;
        // Additive errors with multiplicative seasonality are numerically unstable.
        if (error == EtsComponent::additive && season == EtsComponent::multiplicative) continue;
        out.push_back({error, trend, season});
      }
    }
  }
  return out;
}

std::optional<EtsModel> fit_ets_model(std::span<const double> y, int m, const EtsSpec& spec) {
  const std::size_t n = y.size();
  if (n < 4) return std::nullopt;
  if (has_season(spec) && (m < 2 || n < 2 * static_cast<std::size_t>(m) + 3)) return std::nullopt;
  const double min_y = *std::min_element(y.begin(), y.end());
  const double max_y = *std::max_element(y.begin(), y.end());
  if (needs_positive_mean(spec) && !(min_y > 0.0)) return std::nullopt;

  const bool trend = has_trend(spec);
  const bool damped = spec.trend == EtsTrend::damped;
  const bool season = has_season(spec);
  const int smoothing_count = 1 + (trend ? 1 : 0) + (season ? 1 : 0) + (damped ? 1 : 0);
  const int state_count = 1 + (trend ? 1 : 0) + seasonal_state_count(spec, m);
  const int k = smoothing_count + state_count + 1;
  if (static_cast<double>(n) - k - 1.0 <= 0.0) return std::nullopt;

  // Initial seasonal states from a classical decomposition of the first
  // few periods; level/trend from the seasonally adjusted start.
  std::vector<double> initial_season;
  std::vector<double> adjusted(y.begin(), y.end());
  if (season) {
    const std::size_t window = std::min<std::size_t>(n, 4 * static_cast<std::size_t>(m));
    auto head = y.subspan(0, window);
    initial_season = spec.season == EtsComponent::multiplicative
                         ? stats::multiplicative_seasonal_figure(head, m)
                         : stats::additive_seasonal_figure(head, m);
    for (double s : initial_season) {
      if (!std::isfinite(s) || (spec.season == EtsComponent::multiplicative && !(s > 0.0))) {
        return std::nullopt;
      }
    }
    for (std::size_t t = 0; t < n; ++t) {
      const double s = stats::seasonal_index(initial_season, t);
      adjusted[t] = spec.season == EtsComponent::multiplicative ? y[t] / s : y[t] - s;
    }
  }
  const std::size_t head_n =
      std::min<std::size_t>(n, std::max<std::size_t>(10, 2 * static_cast<std::size_t>(m)));
  std::span<const double> head_adj(adjusted.data(), head_n);
  double l_init = stats::mean(head_adj);
  double b_init = 0.0;
  if (trend) {
    const auto fit = stats::linear_trend(head_adj);
    l_init = fit.intercept;
    b_init = fit.slope;
  }

  const double range = max_y - min_y;
  const double alpha0 = season ? std::max(0.02, 0.2 / m) : 0.2;
  std::vector<double> x0{alpha0};
  std::vector<double> lo{1e-4};
  std::vector<double> hi{0.9999};
  int beta_at = -1, gamma_at = -1, phi_at = -1, level_at = -1, trend_at = -1;
  if (trend) {
    beta_at = static_cast<int>(x0.size());
    x0.push_back(0.01);
    lo.push_back(1e-4);
    hi.push_back(0.9999);
  }
  if (season) {
    gamma_at = static_cast<int>(x0.size());
    x0.push_back(0.01);
    lo.push_back(1e-4);
    hi.push_back(0.9999);
  }
  if (damped) {
    phi_at = static_cast<int>(x0.size());
    x0.push_back(0.97);
    lo.push_back(0.8);
    hi.push_back(0.98);
  }
  level_at = static_cast<int>(x0.size());
  double level_lo = min_y - range;
  if (needs_positive_mean(spec)) level_lo = std::max(level_lo, 1e-8 * max_y);
  x0.push_back(std::clamp(l_init, level_lo, max_y + range));
  lo.push_back(level_lo);
  hi.push_back(max_y + range);
  if (trend) {
    trend_at = static_cast<int>(x0.size());
    x0.push_back(std::clamp(b_init, -range, range));
    lo.push_back(-range);
    hi.push_back(range);
  }

  auto unpack = [&](std::span<const double> p) {
    Smoothing s;
    s.alpha = p[0];
    s.beta = beta_at >= 0 ? p[static_cast<std::size_t>(beta_at)] : 0.0;
    s.gamma = gamma_at >= 0 ? p[static_cast<std::size_t>(gamma_at)] : 0.0;
    s.phi = phi_at >= 0 ? p[static_cast<std::size_t>(phi_at)] : 1.0;
    s.level = p[static_cast<std::size_t>(level_at)];
    s.trend = trend_at >= 0 ? p[static_cast<std::size_t>(trend_at)] : 0.0;
    return s;
  };

  auto objective = [&](std::span<const double> p) {
    const Smoothing s = unpack(p);
    if (trend && s.beta > s.alpha) return kInf;
    if (season && s.gamma > 1.0 - s.alpha) return kInf;
    const FilterOutput f = run_filter(y, m, spec, s, initial_season);
    if (!f.ok) return kInf;
    return criterion_of(y, spec, f);
  };

  stats::NelderMeadOptions options;
  options.restarts = 3;
  options.tolerance = 1e-8;
  options.max_evaluations = 2000;
  const auto result = stats::nelder_mead(objective, x0, lo, hi, options);
  if (!std::isfinite(result.value)) return std::nullopt;

  const Smoothing s = unpack(result.x);
  const FilterOutput f = run_filter(y, m, spec, s, initial_season);
  if (!f.ok) return std::nullopt;

  EtsModel model;
  model.spec = spec;
  model.period = season ? m : 1;
  model.alpha = s.alpha;
  model.beta = s.beta;
  model.gamma = s.gamma;
  model.phi = s.phi;
  model.initial_level = s.level;
  model.initial_trend = s.trend;
  model.initial_season = initial_season;
  model.level = f.level;
  model.trend = f.trend;
  model.season = f.season;
  model.n = n;
  model.criterion = criterion_of(y, spec, f);
  model.parameter_count = k;
  model.aicc = ets_aicc(model.criterion, k, n);
  const double dof = static_cast<double>(n) - k;
  model.sigma2 = f.sse / std::max(1.0, dof);
  if (!std::isfinite(model.aicc)) return std::nullopt;
  return model;
}

std::optional<EtsModel> select_ets(std::span<const double> y, int m, const EtsOptions& options) {
  std::optional<EtsModel> best;
  for (const EtsSpec& spec : ets_candidates(y, m, options)) {
    auto model = fit_ets_model(y, m, spec);
    if (!model) continue;
    // Strict comparison: on ties the earlier (simpler) candidate is kept.
    if (!best || model->aicc < best->aicc) best = std::move(model);
  }
  return best;
}

MethodForecast ets_forecast(const EtsModel& model, int horizon, const MethodContext& ctx,
                            const EtsOptions& options) {
  const auto hc = static_cast<std::size_t>(horizon);
  const EtsSpec& spec = model.spec;
  const std::size_t period = has_season(spec) ? static_cast<std::size_t>(model.period) : 1;
  const Smoothing p{model.alpha, model.beta, model.gamma, model.phi, 0.0, 0.0};

  MethodForecast out;
  out.method_id = "ets";
  out.fitted_by = "ets";
  out.point.resize(hc);
  {
    double level = model.level;
    double trend = model.trend;
    std::vector<double> season = model.season;
    for (std::size_t h = 0; h < hc; ++h) {
      double& slot = season[(model.n + h) % period];
      double lb = 0.0;
      const double mu = one_step(spec, level, trend, p.phi, slot, lb);
      out.point[h] = mu;
      update(spec, p, mu, lb, 0.0, level, trend, slot);
    }
  }

  const bool linear = spec.error == EtsComponent::additive &&
                      spec.season != EtsComponent::multiplicative;
  if (linear) {
    std::vector<double> sd(hc);
    double cum = 0.0;
    for (std::size_t h = 0; h < hc; ++h) {
      if (h > 0) {
        const auto j = static_cast<double>(h);
        double c = model.alpha;
        if (spec.trend == EtsTrend::additive) {
          c += model.beta * j;
        } else if (spec.trend == EtsTrend::damped) {
          c += model.beta * model.phi * (1.0 - std::pow(model.phi, j)) / (1.0 - model.phi);
        }
        if (has_season(spec) && h % period == 0) c += model.gamma;
        cum += c * c;
      }
      sd[h] = std::sqrt(model.sigma2 * (1.0 + cum));
    }
    out.bands = gaussian_bands(out.point, sd, ctx.levels);
    return out;
  }

  // Simulated sample paths.
  const int paths = std::max(100, options.simulation_paths);
  std::mt19937_64 rng(ctx.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> noise(0.0, std::sqrt(model.sigma2));
  std::vector<std::vector<double>> draws(hc, std::vector<double>(static_cast<std::size_t>(paths)));
  for (int path = 0; path < paths; ++path) {
    double level = model.level;
    double trend = model.trend;
    std::vector<double> season = model.season;
    for (std::size_t h = 0; h < hc; ++h) {
      double& slot = season[(model.n + h) % period];
      double lb = 0.0;
      const double mu = one_step(spec, level, trend, p.phi, slot, lb);
      const double e = noise(rng);
      const double value = spec.error == EtsComponent::additive ? mu + e : mu * (1.0 + e);
      draws[h][static_cast<std::size_t>(path)] = value;
      update(spec, p, mu, lb, e, level, trend, slot);
    }
  }
  out.bands.reserve(ctx.levels.size());
  for (double level : ctx.levels) out.bands.push_back(Band{level, std::vector<double>(hc), std::vector<double>(hc)});
  for (std::size_t h = 0; h < hc; ++h) {
    auto& sample = draws[h];
    std::sort(sample.begin(), sample.end());
    for (Band& band : out.bands) {
      const double tail = (1.0 - band.level) / 2.0;
      band.lower[h] = sorted_quantile(sample, tail);
      band.upper[h] = sorted_quantile(sample, 1.0 - tail);
    }
  }
  return out;
}

MethodForecast ets_with_options(const TimeSeries& train, int horizon, const MethodContext& ctx,
                                const EtsOptions& options) {
  auto model = select_ets(train.values(), train.period(), options);
  MethodForecast out;
  if (model) {
    out = ets_forecast(*model, horizon, ctx, options);
    if (!out.all_finite()) model.reset();
  }
  if (!model) {
    out = naive(train, horizon, ctx);
  }
  out.method_id = "ets";
  return out;
}

MethodForecast ets(const TimeSeries& train, int horizon, const MethodContext& ctx) {
  return ets_with_options(train, horizon, ctx, EtsOptions{});
}

MethodForecast ets_boxcox_fixed(const TimeSeries& train, int horizon, const MethodContext& ctx,
                                double lambda, const EtsOptions& options) {
  const auto y = train.values();
  std::vector<double> z(y.size());
  for (std::size_t t = 0; t < y.size(); ++t) z[t] = stats::box_cox(y[t], lambda);
  auto model = select_ets(z, train.period(), options);
  if (!model) {
    throw Error(ErrorKind::method_failure, "no ETS candidate converged on transformed data");
  }
  MethodForecast out = ets_forecast(*model, horizon, ctx, options);
  for (double& v : out.point) v = stats::inverse_box_cox(v, lambda);
  for (Band& band : out.bands) {
    for (double& v : band.lower) v = stats::inverse_box_cox(v, lambda);
    for (double& v : band.upper) v = stats::inverse_box_cox(v, lambda);
  }
  out.method_id = "ets_boxcox";
  out.fitted_by = "ets_boxcox";
  return out;
}

MethodForecast ets_boxcox(const TimeSeries& train, int horizon, const MethodContext& ctx) {
  const auto y = train.values();
  const bool positive = std::all_of(y.begin(), y.end(), [](double v) { return v > 0.0; });
  if (!positive) {
    MethodForecast out = ets(train, horizon, ctx);
    out.method_id = "ets_boxcox";
    return out;
  }
  const double lambda = stats::guerrero_lambda(y, train.period(), 0.0, 1.0);
  return ets_boxcox_fixed(train, horizon, ctx, lambda);
}

ForecastResult forecast_ets(const TimeSeries& train, int horizon, double level) {
  return ets(train, horizon, MethodContext{{level}, 0}).at_level(level);
}

ForecastResult forecast_ets_boxcox(const TimeSeries& train, int horizon, double level) {
  return ets_boxcox(train, horizon, MethodContext{{level}, 0}).at_level(level);
}

}  // namespace divcomb::methods
