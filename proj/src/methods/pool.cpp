#include "divcomb/methods/pool.hpp"

#include <map>
#include <set>

#include "divcomb/methods/arima.hpp"
#include "divcomb/methods/ets.hpp"
#include "divcomb/methods/simple.hpp"
#include "divcomb/methods/stlm_ar.hpp"
#include "divcomb/methods/theta.hpp"

namespace divcomb::methods {

namespace {

const std::map<std::string, MethodSpec>& registry() {
  static const std::map<std::string, MethodSpec> specs = [] {
    std::map<std::string, MethodSpec> m;
    auto add = [&m](MethodSpec s) { m.emplace(s.id, std::move(s)); };
    add({"auto_arima", "ARIMA", false, "rw_drift", auto_arima});
    add({"ets", "ETS", false, "naive", ets});
    add({"ets_boxcox", "ETS (Box-Cox)", false, "ets", ets_boxcox});
    add({"stlm_ar", "STL-AR", true, "ets", stlm_ar});
    add({"rw_drift", "Random walk with drift", false, "naive", rw_drift});
    add({"theta", "Theta", false, "naive", theta});
    add({"naive", "Naive", false, std::nullopt, naive});
    add({"snaive", "Seasonal naive", true, "naive", seasonal_naive});
    return m;
  }();
  return specs;
}

}  // namespace

const std::vector<std::string>& default_pool_ids() {
  static const std::vector<std::string> ids{"auto_arima", "ets",   "ets_boxcox", "stlm_ar",
                                            "rw_drift",   "theta", "naive",      "snaive"};
  return ids;
}

const MethodSpec& method_spec(const std::string& id) {
  const auto it = registry().find(id);
  if (it == registry().end()) throw Error(ErrorKind::invalid_argument, "unknown method '" + id + "'");
  return it->second;
}

std::vector<std::string> registered_method_ids() {
  std::vector<std::string> out;
  for (const auto& [id, spec] : registry()) out.push_back(id);
  return out;
}

Pool::Pool(std::vector<std::string> ids) : ids_(std::move(ids)) {
  if (ids_.size() < 2) throw Error(ErrorKind::invalid_argument, "pool needs at least two methods");
  std::set<std::string> seen;
  for (const auto& id : ids_) {
    method_spec(id);
    if (!seen.insert(id).second) throw Error(ErrorKind::duplicate_id, "method listed twice: " + id);
  }
}

MethodForecast forecast_with_fallback(const std::string& id, const TimeSeries& train,
                                      int horizon, const MethodContext& ctx) {
  std::optional<std::string> current = id;
  while (current) {
    const MethodSpec& spec = method_spec(*current);
    try {
      MethodForecast out = spec.fn(train, horizon, ctx);
      if (out.all_finite() && out.point.size() == static_cast<std::size_t>(horizon)) {
        out.method_id = id;
        if (out.fitted_by.empty()) out.fitted_by = *current;
        return out;
      }
    } catch (const std::exception&) {
      // fall through to the next method in the chain
    }
    current = spec.fallback_id;
  }
  throw Error(ErrorKind::method_failure, "no method in the fallback chain of " + id + " succeeded");
}

std::vector<MethodForecast> Pool::forecast_all(const TimeSeries& train, int horizon,
                                               const MethodContext& ctx) const {
  std::vector<MethodForecast> out;
  out.reserve(ids_.size());
  for (const auto& id : ids_) out.push_back(forecast_with_fallback(id, train, horizon, ctx));
  return out;
}

ForecastMatrix to_matrix(const std::string& series_id, std::span<const MethodForecast> forecasts,
                         double level) {
  std::vector<ForecastResult> rows;
  rows.reserve(forecasts.size());
  for (const auto& f : forecasts) rows.push_back(f.at_level(level));
  return ForecastMatrix::from_results(series_id, rows);
}

}  // namespace divcomb::methods
