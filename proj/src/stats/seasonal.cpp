#include "divcomb/stats/seasonal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "divcomb/core/error.hpp"
#include "divcomb/stats/basic.hpp"
#include "divcomb/stats/optim.hpp"

namespace divcomb::stats {

namespace {

std::vector<double> classical_figure(std::span<const double> x, int m, bool multiplicative) {
  const auto n = x.size();
  const auto period = static_cast<std::size_t>(m);
  if (m < 2 || n < 2 * period) {
    throw Error(ErrorKind::invalid_argument,
                "classical decomposition needs at least two full periods");
  }
  // Centred moving average: weights 1/m, or (0.5, 1, ..., 1, 0.5)/m for even m.
  std::vector<double> ratio(n, std::nan(""));
  const std::size_t half = period / 2;
  for (std::size_t t = half; t + half < n; ++t) {
    double trend = 0.0;
    if (period % 2 == 0) {
      trend += 0.5 * x[t - half] + 0.5 * x[t + half];
      for (std::size_t k = t - half + 1; k < t + half; ++k) trend += x[k];
    } else {
      for (std::size_t k = t - half; k <= t + half; ++k) trend += x[k];
    }
    trend /= static_cast<double>(period);
    ratio[t] = multiplicative ? x[t] / trend : x[t] - trend;
  }
  std::vector<double> figure(period, 0.0);
  for (std::size_t i = 0; i < period; ++i) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t t = i; t < n; t += period) {
      if (std::isfinite(ratio[t])) {
        sum += ratio[t];
        ++count;
      }
    }
    figure[i] = count > 0 ? sum / count : (multiplicative ? 1.0 : 0.0);
  }
  const double avg = mean(figure);
  for (double& f : figure) {
    if (multiplicative) {
      f /= avg;
    } else {
      f -= avg;
    }
  }
  return figure;
}

}  // namespace

std::vector<double> multiplicative_seasonal_figure(std::span<const double> x, int m) {
  return classical_figure(x, m, true);
}

std::vector<double> additive_seasonal_figure(std::span<const double> x, int m) {
  return classical_figure(x, m, false);
}

bool seasonality_test(std::span<const double> x, int m) {
  if (m <= 1 || x.size() < 3 * static_cast<std::size_t>(m)) return false;
  const auto r = acf(x, m);
  double cum = 1.0;
  for (int k = 1; k < m; ++k) cum += 2.0 * r[static_cast<std::size_t>(k - 1)] * r[static_cast<std::size_t>(k - 1)];
  const double limit = 1.645 / std::sqrt(static_cast<double>(x.size())) * std::sqrt(cum);
  return std::abs(r[static_cast<std::size_t>(m - 1)]) > limit;
}

// ---------------------------------------------------------------------------
// STL. 1-based index arithmetic mirrors the classic loess formulation; the
// helpers take 0-based spans and translate.

namespace {

int next_odd(int v) { return v % 2 == 0 ? v + 1 : v; }

// Local regression estimate at abscissa xs (1-based) using points
// nleft..nright. Returns false when all weights vanish.
bool loess_estimate(std::span<const double> y, int n, int len, int degree, double xs,
                    double& ys, int nleft, int nright, std::vector<double>& w,
                    bool use_rw, std::span<const double> rw) {
  const double range = static_cast<double>(n) - 1.0;
  double h = std::max(xs - nleft, static_cast<double>(nright) - xs);
  if (len > n) h += static_cast<double>((len - n) / 2);
  const double h9 = 0.999 * h;
  const double h1 = 0.001 * h;
  double a = 0.0;
  for (int j = nleft; j <= nright; ++j) {
    double& wj = w[static_cast<std::size_t>(j - 1)];
    wj = 0.0;
    const double r = std::abs(static_cast<double>(j) - xs);
    if (r <= h9) {
      if (r <= h1) {
        wj = 1.0;
      } else {
        const double q = r / h;
        const double c = 1.0 - q * q * q;
        wj = c * c * c;
      }
      if (use_rw) wj *= rw[static_cast<std::size_t>(j - 1)];
      a += wj;
    }
  }
  if (a <= 0.0) return false;
  for (int j = nleft; j <= nright; ++j) w[static_cast<std::size_t>(j - 1)] /= a;
  if (h > 0.0 && degree > 0) {
    double center = 0.0;
    for (int j = nleft; j <= nright; ++j) center += w[static_cast<std::size_t>(j - 1)] * j;
    double b = xs - center;
    double c = 0.0;
    for (int j = nleft; j <= nright; ++j) {
      c += w[static_cast<std::size_t>(j - 1)] * (j - center) * (j - center);
    }
    if (std::sqrt(c) > 0.001 * range) {
      b /= c;
      for (int j = nleft; j <= nright; ++j) {
        w[static_cast<std::size_t>(j - 1)] *= b * (j - center) + 1.0;
      }
    }
  }
  double value = 0.0;
  for (int j = nleft; j <= nright; ++j) {
    value += w[static_cast<std::size_t>(j - 1)] * y[static_cast<std::size_t>(j - 1)];
  }
  ys = value;
  return true;
}

// Loess smoothing of y (length n) evaluated every `jump` points with linear
// interpolation in between.
void loess_smooth(std::span<const double> y, int n, int len, int degree, int jump,
                  bool use_rw, std::span<const double> rw, std::span<double> ys) {
  std::vector<double> w(static_cast<std::size_t>(n));
  auto at = [&](int i) -> double& { return ys[static_cast<std::size_t>(i - 1)]; };
  auto yv = [&](int i) { return y[static_cast<std::size_t>(i - 1)]; };
  if (n < 2) {
    at(1) = yv(1);
    return;
  }
  const int step = std::min(jump, n - 1);
  int nleft = 1;
  int nright = n;
  if (len >= n) {
    nleft = 1;
    nright = n;
    for (int i = 1; i <= n; i += step) {
      if (!loess_estimate(y, n, len, degree, i, at(i), nleft, nright, w, use_rw, rw)) at(i) = yv(i);
    }
  } else if (step == 1) {
    const int nsh = (len + 1) / 2;
    nleft = 1;
    nright = len;
    for (int i = 1; i <= n; ++i) {
      if (i > nsh && nright != n) {
        ++nleft;
        ++nright;
      }
      if (!loess_estimate(y, n, len, degree, i, at(i), nleft, nright, w, use_rw, rw)) at(i) = yv(i);
    }
  } else {
    const int nsh = (len + 1) / 2;
    for (int i = 1; i <= n; i += step) {
      if (i < nsh) {
        nleft = 1;
        nright = len;
      } else if (i >= n - nsh + 1) {
        nleft = n - len + 1;
        nright = n;
      } else {
        nleft = i - nsh + 1;
        nright = len + i - nsh;
      }
      if (!loess_estimate(y, n, len, degree, i, at(i), nleft, nright, w, use_rw, rw)) at(i) = yv(i);
    }
  }
  if (step != 1) {
    for (int i = 1; i <= n - step; i += step) {
      const double delta = (at(i + step) - at(i)) / step;
      for (int j = i + 1; j < i + step; ++j) at(j) = at(i) + delta * (j - i);
    }
    const int k = ((n - 1) / step) * step + 1;
    if (k != n) {
      if (!loess_estimate(y, n, len, degree, n, at(n), nleft, nright, w, use_rw, rw)) at(n) = yv(n);
      if (k != n - 1) {
        const double delta = (at(n) - at(k)) / (n - k);
        for (int j = k + 1; j < n; ++j) at(j) = at(k) + delta * (j - k);
      }
    }
  }
}

std::vector<double> moving_average(std::span<const double> x, int len) {
  const int n = static_cast<int>(x.size());
  const int out_n = n - len + 1;
  std::vector<double> out(static_cast<std::size_t>(std::max(out_n, 0)));
  if (out_n <= 0) return out;
  double v = 0.0;
  for (int i = 0; i < len; ++i) v += x[static_cast<std::size_t>(i)];
  out[0] = v / len;
  for (int j = 1; j < out_n; ++j) {
    v += x[static_cast<std::size_t>(len + j - 1)] - x[static_cast<std::size_t>(j - 1)];
    out[static_cast<std::size_t>(j)] = v / len;
  }
  return out;
}

// Cycle-subseries smoothing: returns a series of length n + 2m extended by
// one period on both ends.
std::vector<double> smooth_cycle_subseries(std::span<const double> y, int n, int m, int ns,
                                           int degree, int jump) {
  std::vector<double> season(static_cast<std::size_t>(n + 2 * m));
  std::vector<double> sub;
  std::vector<double> smoothed;
  std::vector<double> w;
  for (int j = 1; j <= m; ++j) {
    const int k = (n - j) / m + 1;
    sub.assign(static_cast<std::size_t>(k), 0.0);
    for (int i = 1; i <= k; ++i) sub[static_cast<std::size_t>(i - 1)] = y[static_cast<std::size_t>((i - 1) * m + j - 1)];
    smoothed.assign(static_cast<std::size_t>(k + 2), 0.0);
    loess_smooth(sub, k, ns, degree, jump, false, {},
                 std::span<double>(smoothed).subspan(1, static_cast<std::size_t>(k)));
    w.assign(static_cast<std::size_t>(k), 0.0);
    const int nright = std::min(ns, k);
    if (!loess_estimate(sub, k, ns, degree, 0.0, smoothed[0], 1, nright, w, false, {})) {
      smoothed[0] = smoothed[1];
    }
    const int nleft = std::max(1, k - ns + 1);
    if (!loess_estimate(sub, k, ns, degree, k + 1.0, smoothed[static_cast<std::size_t>(k + 1)],
                        nleft, k, w, false, {})) {
      smoothed[static_cast<std::size_t>(k + 1)] = smoothed[static_cast<std::size_t>(k)];
    }
    for (int i = 1; i <= k + 2; ++i) {
      season[static_cast<std::size_t>((i - 1) * m + j - 1)] = smoothed[static_cast<std::size_t>(i - 1)];
    }
  }
  return season;
}

}  // namespace

StlDecomposition stl(std::span<const double> x, int m, const StlOptions& options) {
  const int n = static_cast<int>(x.size());
  if (m < 2 || n <= 2 * m) {
    throw Error(ErrorKind::invalid_argument, "STL needs m >= 2 and more than two periods");
  }
  const int ns = std::max(3, next_odd(options.seasonal_window));
  const int trend_default = next_odd(static_cast<int>(
      std::ceil(1.5 * m / (1.0 - 1.5 / options.seasonal_window))));
  const int nt = std::max(3, next_odd(options.trend_window > 0 ? options.trend_window : trend_default));
  const int nl = std::max(3, next_odd(options.lowpass_window > 0 ? options.lowpass_window : m));
  const int ns_jump = static_cast<int>(std::ceil(ns / 10.0));
  const int nt_jump = static_cast<int>(std::ceil(nt / 10.0));
  const int nl_jump = static_cast<int>(std::ceil(nl / 10.0));

  StlDecomposition out;
  out.trend.assign(static_cast<std::size_t>(n), 0.0);
  out.seasonal.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<double> detrended(static_cast<std::size_t>(n));
  std::vector<double> lowpass_smoothed(static_cast<std::size_t>(n));

  for (int iter = 0; iter < options.inner_iterations; ++iter) {
    for (int i = 0; i < n; ++i) detrended[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] - out.trend[static_cast<std::size_t>(i)];
    auto cycle = smooth_cycle_subseries(detrended, n, m, ns, options.seasonal_degree, ns_jump);
    auto low = moving_average(moving_average(moving_average(cycle, m), m), 3);
    loess_smooth(low, n, nl, options.trend_degree, nl_jump, false, {}, lowpass_smoothed);
    for (int i = 0; i < n; ++i) {
      out.seasonal[static_cast<std::size_t>(i)] =
          cycle[static_cast<std::size_t>(m + i)] - lowpass_smoothed[static_cast<std::size_t>(i)];
      detrended[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] - out.seasonal[static_cast<std::size_t>(i)];
    }
    loess_smooth(detrended, n, nt, options.trend_degree, nt_jump, false, {}, out.trend);
  }
  out.remainder.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    out.remainder[u] = x[u] - out.seasonal[u] - out.trend[u];
  }
  return out;
}

double seasonal_strength(std::span<const double> x, int m) {
  const auto fit = stl(x, m);
  std::vector<double> sr(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sr[i] = fit.seasonal[i] + fit.remainder[i];
  const double var_sr = variance(sr);
  if (var_sr <= 0.0) return 0.0;
  return std::clamp(1.0 - variance(fit.remainder) / var_sr, 0.0, 1.0);
}

double kpss_statistic(std::span<const double> x) {
  const auto n = x.size();
  const double mu = mean(x);
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = x[i] - mu;
  double partial = 0.0;
  double eta = 0.0;
  for (double v : e) {
    partial += v;
    eta += partial * partial;
  }
  const double nn = static_cast<double>(n);
  eta /= nn * nn;
  const int lags = static_cast<int>(3.0 * std::sqrt(nn) / 13.0);
  double s2 = 0.0;
  for (double v : e) s2 += v * v;
  s2 /= nn;
  for (int s = 1; s <= lags; ++s) {
    double c = 0.0;
    for (std::size_t t = static_cast<std::size_t>(s); t < n; ++t) c += e[t] * e[t - static_cast<std::size_t>(s)];
    s2 += 2.0 * (1.0 - s / (lags + 1.0)) * c / nn;
  }
  if (s2 <= 0.0) return 0.0;
  return eta / s2;
}

bool kpss_rejects(std::span<const double> x) { return kpss_statistic(x) > 0.463; }

double box_cox(double y, double lambda) {
  if (lambda == 0.0) return std::log(y);
  return (std::pow(y, lambda) - 1.0) / lambda;
}

double inverse_box_cox(double z, double lambda) {
  if (lambda == 0.0) return std::exp(z);
  const double base = lambda * z + 1.0;
  if (base <= 0.0) return 0.0;
  return std::pow(base, 1.0 / lambda);
}

double guerrero_criterion(std::span<const double> x, int m, double lambda) {
  const auto period = static_cast<std::size_t>(std::max(2, m));
  const std::size_t groups = x.size() / period;
  if (groups < 2) return 0.0;
  const std::size_t start = x.size() - groups * period;
  std::vector<double> ratio(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    auto block = x.subspan(start + g * period, period);
    ratio[g] = stddev(block) / std::pow(mean(block), 1.0 - lambda);
  }
  const double mu = mean(ratio);
  if (mu == 0.0) return 0.0;
  return stddev(ratio) / mu;
}

double guerrero_lambda(std::span<const double> x, int m, double lower, double upper) {
  return golden_section([&](double lam) { return guerrero_criterion(x, m, lam); }, lower,
                        upper, 1e-5);
}

}  // namespace divcomb::stats
