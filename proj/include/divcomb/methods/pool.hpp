#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "divcomb/methods/method.hpp"

namespace divcomb::methods {

using MethodFn = std::function<MethodForecast(const TimeSeries&, int, const MethodContext&)>;

struct MethodSpec {
  std::string id;
  std::string display_name;
  bool requires_seasonality = false;
  std::optional<std::string> fallback_id;
  MethodFn fn;
};

/// Canonical default pool order.
const std::vector<std::string>& default_pool_ids();

/// Built-in registry lookup. Throws Error(invalid_argument) on unknown ids.
const MethodSpec& method_spec(const std::string& id);
std::vector<std::string> registered_method_ids();

/// Ordered, validated list of methods.
class Pool {
 public:
  explicit Pool(std::vector<std::string> ids = default_pool_ids());

  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::size_t size() const noexcept { return ids_.size(); }

  /// Runs every method; a throwing or non-finite method is replaced by its
  /// fallback chain, which always ends at naive.
  std::vector<MethodForecast> forecast_all(const TimeSeries& train, int horizon,
                                           const MethodContext& ctx) const;

 private:
  std::vector<std::string> ids_;
};

/// Runs one method with its fallback chain.
MethodForecast forecast_with_fallback(const std::string& id, const TimeSeries& train,
                                      int horizon, const MethodContext& ctx);

/// Pool output at one level as an M x H matrix (rows repaired).
ForecastMatrix to_matrix(const std::string& series_id, std::span<const MethodForecast> forecasts,
                         double level);

}  // namespace divcomb::methods
