#include "divcomb/stats/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace divcomb::stats {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Simplex {
  std::vector<std::vector<double>> points;
  std::vector<double> values;
};

class BoundedObjective {
 public:
  BoundedObjective(const Objective& f, std::span<const double> lower,
                   std::span<const double> upper)
      : f_(f), lower_(lower), upper_(upper) {}

  void project(std::vector<double>& x) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i < lower_.size()) x[i] = std::max(x[i], lower_[i]);
      if (i < upper_.size()) x[i] = std::min(x[i], upper_[i]);
    }
  }

  double operator()(std::vector<double>& x) {
    project(x);
    ++evaluations;
    const double v = f_(x);
    return std::isfinite(v) ? v : kInf;
  }

  int evaluations = 0;

 private:
  const Objective& f_;
  std::span<const double> lower_;
  std::span<const double> upper_;
};

double step_for(std::size_t i, const std::vector<double>& x, std::span<const double> lower,
                std::span<const double> upper, double fraction) {
  const bool bounded = i < lower.size() && i < upper.size() && std::isfinite(lower[i]) &&
                       std::isfinite(upper[i]);
  double step = bounded ? fraction * (upper[i] - lower[i])
                        : fraction * std::max(std::abs(x[i]), 1e-3);
  if (step == 0.0) step = fraction;
  // Step towards the interior when sitting on the upper bound.
  if (i < upper.size() && x[i] + step > upper[i]) step = -step;
  return step;
}

Simplex build_simplex(BoundedObjective& f, const std::vector<double>& x0,
                      std::span<const double> lower, std::span<const double> upper,
                      double fraction) {
  const std::size_t n = x0.size();
  Simplex s;
  s.points.assign(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) {
    s.points[i + 1][i] += step_for(i, x0, lower, upper, fraction);
  }
  s.values.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) s.values[i] = f(s.points[i]);
  return s;
}

// One Nelder-Mead run; returns true on convergence.
bool run_once(BoundedObjective& f, Simplex& s, int budget, double tolerance) {
  const std::size_t n = s.points.size() - 1;
  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n);
  std::vector<double> trial(n);
  std::vector<double> trial2(n);

  while (f.evaluations < budget) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s.values[a] < s.values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];

    const double fb = s.values[best];
    const double fw = s.values[worst];
    if (std::isfinite(fw) && std::abs(fw - fb) <= tolerance * (std::abs(fb) + tolerance)) {
      return true;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += s.points[k][j];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    for (std::size_t j = 0; j < n; ++j) {
      trial[j] = centroid[j] + (centroid[j] - s.points[worst][j]);
    }
    const double fr = f(trial);

    if (fr < fb) {
      for (std::size_t j = 0; j < n; ++j) {
        trial2[j] = centroid[j] + 2.0 * (centroid[j] - s.points[worst][j]);
      }
      const double fe = f(trial2);
      if (fe < fr) {
        s.points[worst] = trial2;
        s.values[worst] = fe;
      } else {
        s.points[worst] = trial;
        s.values[worst] = fr;
      }
      continue;
    }
    if (fr < s.values[second]) {
      s.points[worst] = trial;
      s.values[worst] = fr;
      continue;
    }
    // Contraction (outside when the reflection helped at all, inside otherwise).
    const bool outside = fr < fw;
    for (std::size_t j = 0; j < n; ++j) {
      const double toward = outside ? trial[j] : s.points[worst][j];
      trial2[j] = centroid[j] + 0.5 * (toward - centroid[j]);
    }
    const double fc = f(trial2);
    if (fc < std::min(fr, fw)) {
      s.points[worst] = trial2;
      s.values[worst] = fc;
      continue;
    }
    // Shrink towards the best vertex.
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == best) continue;
      for (std::size_t j = 0; j < n; ++j) {
        s.points[k][j] = s.points[best][j] + 0.5 * (s.points[k][j] - s.points[best][j]);
      }
      s.values[k] = f(s.points[k]);
    }
  }
  return false;
}

}  // namespace

OptimResult nelder_mead(const Objective& f, std::vector<double> x0,
                        std::span<const double> lower, std::span<const double> upper,
                        const NelderMeadOptions& options) {
  BoundedObjective objective(f, lower, upper);
  objective.project(x0);
  OptimResult result;
  if (x0.empty()) {
    result.value = objective(x0);
    result.evaluations = objective.evaluations;
    result.converged = true;
    return result;
  }

  std::vector<double> best = x0;
  double best_value = objective(best);
  bool converged = false;
  double fraction = options.initial_step;

  for (int attempt = 0; attempt <= options.restarts; ++attempt) {
    Simplex s = build_simplex(objective, best, lower, upper, fraction);
    converged = run_once(objective, s, options.max_evaluations, options.tolerance);
    const auto it = std::min_element(s.values.begin(), s.values.end());
    const double value = *it;
    const auto& point = s.points[static_cast<std::size_t>(it - s.values.begin())];
    const bool improved =
        value < best_value - options.tolerance * (std::abs(best_value) + options.tolerance);
    if (value < best_value) {
      best_value = value;
      best = point;
    }
    if (attempt > 0 && !improved) break;
    if (objective.evaluations >= options.max_evaluations) break;
    fraction *= 0.5;
  }

  result.x = std::move(best);
  result.value = best_value;
  result.evaluations = objective.evaluations;
  result.converged = converged && std::isfinite(best_value);
  return result;
}

double golden_section(const std::function<double(double)>& f, double a, double b,
                      double tolerance) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (std::abs(b - a) > tolerance) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = f(d);
    }
  }
  return (a + b) / 2.0;
}

}  // namespace divcomb::stats
