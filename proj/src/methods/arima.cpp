#include "divcomb/methods/arima.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <tuple>

#include "divcomb/methods/simple.hpp"
#include "divcomb/stats/basic.hpp"
#include "divcomb/stats/optim.hpp"
#include "divcomb/stats/seasonal.hpp"

namespace divcomb::methods {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Lag {
  std::size_t lag;
  double coef;
};

// Dense coefficients a_k of w_t = sum_k a_k w_{t-k} (AR, sign = -1 in the
// product term) or b_k of e_t + sum_k b_k e_{t-k} (MA, sign = +1).
std::vector<double> expand(std::span<const double> nonseasonal, std::span<const double> seasonal,
                           int m, double cross_sign) {
  const std::size_t degree = nonseasonal.size() + seasonal.size() * static_cast<std::size_t>(m);
  std::vector<double> out(degree, 0.0);
  for (std::size_t i = 0; i < nonseasonal.size(); ++i) out[i] += nonseasonal[i];
  for (std::size_t j = 0; j < seasonal.size(); ++j) {
    const std::size_t sl = (j + 1) * static_cast<std::size_t>(m);
    out[sl - 1] += seasonal[j];
    for (std::size_t i = 0; i < nonseasonal.size(); ++i) {
      out[sl + i] += cross_sign * nonseasonal[i] * seasonal[j];
    }
  }
  return out;
}

std::vector<Lag> sparse(const std::vector<double>& dense) {
  std::vector<Lag> out;
  for (std::size_t k = 0; k < dense.size(); ++k) {
    if (dense[k] != 0.0) out.push_back({k + 1, dense[k]});
  }
  return out;
}

// All roots of 1 - sum c_i z^i lie outside the circle of radius 1.01.
bool roots_outside(std::span<const double> c) {
  std::size_t p = c.size();
  while (p > 0 && c[p - 1] == 0.0) --p;
  if (p == 0) return true;
  if (p == 1) return std::abs(c[0]) < 1.0 / 1.01;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < p; ++i) companion(0, static_cast<Eigen::Index>(i)) = c[i];
  for (std::size_t i = 1; i < p; ++i) companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) return false;
  const double radius = solver.eigenvalues().cwiseAbs().maxCoeff();
  return radius < 1.0 / 1.01;
}

bool admissible(const ArimaModel& model) {
  auto negated = [](const std::vector<double>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = -v[i];
    return out;
  };
  return roots_outside(model.ar) && roots_outside(model.sar) && roots_outside(negated(model.ma)) &&
         roots_outside(negated(model.sma));
}

std::vector<double> differenced(std::span<const double> y, int d, int D, int m) {
  std::vector<double> w(y.begin(), y.end());
  for (int i = 0; i < D; ++i) w = stats::difference(w, m);
  for (int i = 0; i < d; ++i) w = stats::difference(w, 1);
  return w;
}

bool is_constant(std::span<const double> x) {
  if (x.empty()) return true;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *hi - *lo <= 1e-12 * std::max(1.0, std::abs(*hi));
}

struct Layout {
  std::size_t p, q, P, Q;
  bool constant;
  std::size_t size() const { return p + q + P + Q + (constant ? 1 : 0); }
};

void unpack(const Layout& layout, std::span<const double> x, ArimaModel& model) {
  std::size_t at = 0;
  model.ar.assign(x.begin() + static_cast<std::ptrdiff_t>(at), x.begin() + static_cast<std::ptrdiff_t>(at + layout.p));
  at += layout.p;
  model.ma.assign(x.begin() + static_cast<std::ptrdiff_t>(at), x.begin() + static_cast<std::ptrdiff_t>(at + layout.q));
  at += layout.q;
  model.sar.assign(x.begin() + static_cast<std::ptrdiff_t>(at), x.begin() + static_cast<std::ptrdiff_t>(at + layout.P));
  at += layout.P;
  model.sma.assign(x.begin() + static_cast<std::ptrdiff_t>(at), x.begin() + static_cast<std::ptrdiff_t>(at + layout.Q));
  at += layout.Q;
  model.mean = layout.constant ? x[at] : 0.0;
}

// Conditional residuals; returns the SSE over t >= start.
double css_residuals(std::span<const double> w, double mu, const std::vector<Lag>& ar,
                     const std::vector<Lag>& ma, std::size_t start, std::vector<double>& e) {
  const std::size_t n = w.size();
  e.assign(n, 0.0);
  double sse = 0.0;
  for (std::size_t t = start; t < n; ++t) {
    double v = w[t] - mu;
    for (const Lag& l : ar) v -= l.coef * (w[t - l.lag] - mu);
    for (const Lag& l : ma) {
      if (t >= l.lag) v -= l.coef * e[t - l.lag];
    }
    e[t] = v;
    sse += v * v;
    if (!std::isfinite(sse)) return kInf;
  }
  return sse;
}

// Exact Gaussian log-likelihood of a zero-mean ARMA process (Harvey state
// space form) with sigma^2 concentrated out.
double exact_loglik(std::span<const double> z, const std::vector<double>& a,
                    const std::vector<double>& b, double* sigma2_out) {
  const std::size_t r = std::max(a.size(), b.size() + 1);
  const auto ri = static_cast<Eigen::Index>(r);
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(ri);
  for (std::size_t i = 0; i < a.size(); ++i) phi(static_cast<Eigen::Index>(i)) = a[i];
  Eigen::VectorXd rv = Eigen::VectorXd::Zero(ri);
  rv(0) = 1.0;
  for (std::size_t j = 0; j < b.size(); ++j) rv(static_cast<Eigen::Index>(j + 1)) = b[j];

  auto apply_t = [&](const Eigen::MatrixXd& m) {
    // (T M): row i = phi_i * M.row(0) + M.row(i + 1)
    Eigen::MatrixXd out(ri, m.cols());
    for (Eigen::Index i = 0; i < ri; ++i) {
      out.row(i) = phi(i) * m.row(0);
      if (i + 1 < ri) out.row(i) += m.row(i + 1);
    }
    return out;
  };
  const Eigen::MatrixXd rr = rv * rv.transpose();

  // Stationary covariance by doubling: P = sum_k T^k RR' T'^k.
  Eigen::MatrixXd tmat = Eigen::MatrixXd::Zero(ri, ri);
  tmat.col(0) = phi;
  for (Eigen::Index i = 0; i + 1 < ri; ++i) tmat(i, i + 1) = 1.0;
  Eigen::MatrixXd pmat = rr;
  Eigen::MatrixXd power = tmat;
  for (int iter = 0; iter < 60; ++iter) {
    const Eigen::MatrixXd add = power * pmat * power.transpose();
    pmat += add;
    power = power * power;
    const double scale = add.cwiseAbs().maxCoeff();
    if (!std::isfinite(scale) || pmat.cwiseAbs().maxCoeff() > 1e12) return -kInf;
    if (scale < 1e-12 * std::max(1.0, pmat.cwiseAbs().maxCoeff())) break;
  }

  Eigen::VectorXd state = Eigen::VectorXd::Zero(ri);
  double ssq = 0.0;
  double sumlog = 0.0;
  bool steady = false;
  double f_steady = 1.0;
  Eigen::VectorXd gain_steady;
  for (double obs : z) {
    const double v = obs - state(0);
    double f;
    Eigen::VectorXd gain;
    if (steady) {
      f = f_steady;
      gain = gain_steady;
    } else {
      f = pmat(0, 0);
      if (!(f > 0.0)) return -kInf;
      gain = pmat.col(0) / f;
    }
    ssq += v * v / f;
    sumlog += std::log(f);
    state += gain * v;
    // predict
    Eigen::VectorXd next(ri);
    for (Eigen::Index i = 0; i < ri; ++i) {
      next(i) = phi(i) * state(0) + (i + 1 < ri ? state(i + 1) : 0.0);
    }
    state = next;
    if (!steady) {
      Eigen::MatrixXd updated = pmat - gain * pmat.row(0);
      const Eigen::MatrixXd tp = apply_t(updated);
      const Eigen::MatrixXd predicted = apply_t(tp.transpose()).transpose() + rr;
      if ((predicted - pmat).cwiseAbs().maxCoeff() < 1e-10) {
        steady = true;
        f_steady = predicted(0, 0);
        gain_steady = predicted.col(0) / f_steady;
      }
      pmat = predicted;
    }
  }
  const double n = static_cast<double>(z.size());
  const double sigma2 = ssq / n;
  if (!(sigma2 > 0.0)) return -kInf;
  if (sigma2_out != nullptr) *sigma2_out = sigma2;
  return -0.5 * (n * std::log(2.0 * std::numbers::pi * sigma2) + sumlog + n);
}

double aicc_of(double loglik, int npar, std::size_t n) {
  const double k = npar;
  const double nn = static_cast<double>(n);
  if (nn - k - 1.0 <= 0.0) return kInf;
  return -2.0 * loglik + 2.0 * k + 2.0 * k * (k + 1.0) / (nn - k - 1.0);
}

}  // namespace

std::string ArimaOrder::name() const {
  std::string s = "ARIMA(" + std::to_string(p) + "," + std::to_string(d) + "," +
                  std::to_string(q) + ")";
  if (period > 1) {
    s += "(" + std::to_string(P) + "," + std::to_string(D) + "," + std::to_string(Q) + ")[" +
         std::to_string(period) + "]";
  }
  if (constant) s += (d + D == 0) ? " with non-zero mean" : " with drift";
  return s;
}

int kpss_differences(std::span<const double> x, int max_d) {
  std::vector<double> w(x.begin(), x.end());
  int d = 0;
  while (d < max_d && w.size() > 3 && !is_constant(w) && stats::kpss_rejects(w)) {
    w = stats::difference(w, 1);
    ++d;
  }
  return d;
}

int seasonal_differences(std::span<const double> x, int m) {
  if (m <= 1 || x.size() <= 2 * static_cast<std::size_t>(m) || is_constant(x)) return 0;
  return stats::seasonal_strength(x, m) > 0.64 ? 1 : 0;
}

std::optional<ArimaModel> fit_arima(std::span<const double> y, const ArimaOrder& order,
                                    ArimaFitMethod method) {
  const int m = std::max(1, order.period);
  if ((order.P > 0 || order.Q > 0 || order.D > 0) && m < 2) return std::nullopt;
  const std::vector<double> w = differenced(y, order.d, order.D, m);
  const Layout layout{static_cast<std::size_t>(order.p), static_cast<std::size_t>(order.q),
                      static_cast<std::size_t>(order.P), static_cast<std::size_t>(order.Q),
                      order.constant};
  const std::size_t start = layout.p + layout.P * static_cast<std::size_t>(m);
  const int npar = static_cast<int>(layout.size()) + 1;
  if (w.size() <= start + static_cast<std::size_t>(npar) + 2) return std::nullopt;

  ArimaModel model;
  model.order = order;
  model.order.period = m;
  model.n_used = w.size();

  const double w_mean = stats::mean(w);
  const double w_sd = std::max(stats::stddev(w), 1e-8 * std::max(1.0, std::abs(w_mean)));
  std::vector<double> e;

  auto css_objective = [&](std::span<const double> x) {
    ArimaModel trial;
    unpack(layout, x, trial);
    const auto a = sparse(expand(trial.ar, trial.sar, m, -1.0));
    const auto b = sparse(expand(trial.ma, trial.sma, m, 1.0));
    const double sse = css_residuals(w, trial.mean, a, b, start, e);
    return sse;
  };

  const std::size_t n_css = w.size() - start;
  if (layout.p + layout.q + layout.P + layout.Q == 0) {
    // No ARMA terms: closed form.
    model.mean = order.constant ? w_mean : 0.0;
    double ss = 0.0;
    for (double v : w) ss += (v - model.mean) * (v - model.mean);
    model.sigma2 = ss / static_cast<double>(w.size());
    if (!(model.sigma2 > 0.0)) model.sigma2 = 1e-300;
    model.loglik = -0.5 * static_cast<double>(w.size()) *
                   (std::log(2.0 * std::numbers::pi * model.sigma2) + 1.0);
    model.aicc = aicc_of(model.loglik, npar, w.size());
    model.ml_refined = method == ArimaFitMethod::css_then_ml;
    return std::isfinite(model.aicc) ? std::optional<ArimaModel>(model) : std::nullopt;
  }

  std::vector<double> x0(layout.size(), 0.0);
  std::vector<double> lo(layout.size(), -2.0);
  std::vector<double> hi(layout.size(), 2.0);
  if (layout.constant) {
    x0.back() = w_mean;
    lo.back() = w_mean - 2.0 * w_sd;
    hi.back() = w_mean + 2.0 * w_sd;
  }
  stats::NelderMeadOptions options;
  options.restarts = 1;
  options.tolerance = 1e-8;
  options.max_evaluations = 400 * static_cast<int>(layout.size()) + 400;
  options.initial_step = 0.05;
  const auto css = stats::nelder_mead(css_objective, x0, lo, hi, options);
  if (!std::isfinite(css.value) || !(css.value > 0.0)) return std::nullopt;
  unpack(layout, css.x, model);
  if (!admissible(model)) return std::nullopt;
  model.sigma2 = css.value / static_cast<double>(n_css);
  // Scaled to the full differenced length so orders with different
  // conditioning lags stay comparable.
  model.loglik = -0.5 * static_cast<double>(w.size()) *
                 (std::log(2.0 * std::numbers::pi * model.sigma2) + 1.0);

  if (method == ArimaFitMethod::css_then_ml) {
    auto ml_objective = [&](std::span<const double> x) {
      ArimaModel trial;
      unpack(layout, x, trial);
      if (!admissible(trial)) return kInf;
      std::vector<double> z(w.size());
      for (std::size_t t = 0; t < w.size(); ++t) z[t] = w[t] - trial.mean;
      const double ll = exact_loglik(z, expand(trial.ar, trial.sar, m, -1.0),
                                     expand(trial.ma, trial.sma, m, 1.0), nullptr);
      return std::isfinite(ll) ? -ll : kInf;
    };
    options.initial_step = 0.02;
    const auto ml = stats::nelder_mead(ml_objective, css.x, lo, hi, options);
    if (std::isfinite(ml.value)) {
      ArimaModel refined = model;
      unpack(layout, ml.x, refined);
      std::vector<double> z(w.size());
      for (std::size_t t = 0; t < w.size(); ++t) z[t] = w[t] - refined.mean;
      double sigma2 = 0.0;
      const double ll = exact_loglik(z, expand(refined.ar, refined.sar, m, -1.0),
                                     expand(refined.ma, refined.sma, m, 1.0), &sigma2);
      if (std::isfinite(ll) && admissible(refined)) {
        refined.loglik = ll;
        refined.sigma2 = sigma2;
        refined.ml_refined = true;
        model = refined;
      }
    }
  }
  model.aicc = aicc_of(model.loglik, npar, w.size());
  if (!std::isfinite(model.aicc)) return std::nullopt;
  return model;
}

std::optional<ArimaModel> select_arima(std::span<const double> y, int m,
                                       const AutoArimaOptions& options) {
  const int period = std::max(1, m);
  const int D = seasonal_differences(y, period);
  std::vector<double> x(y.begin(), y.end());
  if (D > 0) x = stats::difference(x, period);
  const int d = kpss_differences(x);
  const bool seasonal = period > 1;
  const bool allow_constant = d + D <= 1;
  const int max_P = seasonal ? options.max_P : 0;
  const int max_Q = seasonal ? options.max_Q : 0;

  using Key = std::tuple<int, int, int, int, bool>;
  std::set<Key> visited;
  std::optional<ArimaModel> best;
  int fitted = 0;

  auto try_order = [&](int p, int q, int P, int Q, bool constant) -> bool {
    if (p < 0 || q < 0 || P < 0 || Q < 0) return false;
    if (p > options.max_p || q > options.max_q || P > max_P || Q > max_Q) return false;
    if (p + q + P + Q > options.max_order) return false;
    if (constant && !allow_constant) return false;
    if (!visited.insert({p, q, P, Q, constant}).second) return false;
    if (fitted >= options.max_models) return false;
    ++fitted;
    ArimaOrder order{p, d, q, P, D, Q, period, constant};
    auto model = fit_arima(y, order, ArimaFitMethod::conditional_sum_of_squares);
    if (!model) return false;
    if (!best || model->aicc < best->aicc) {
      best = std::move(model);
      return true;
    }
    return false;
  };

  const bool c = allow_constant;
  if (seasonal) {
    try_order(2, 2, 1, 1, c);
    try_order(0, 0, 0, 0, c);
    try_order(1, 0, 1, 0, c);
    try_order(0, 1, 0, 1, c);
  } else {
    try_order(2, 2, 0, 0, c);
    try_order(0, 0, 0, 0, c);
    try_order(1, 0, 0, 0, c);
    try_order(0, 1, 0, 0, c);
  }
  if (c) try_order(0, 0, 0, 0, false);
  if (!best) return std::nullopt;

  bool improved = true;
  while (improved && fitted < options.max_models) {
    improved = false;
    const ArimaOrder o = best->order;
    const int moves[][4] = {{0, 0, -1, 0}, {0, 0, 1, 0},  {0, 0, 0, -1}, {0, 0, 0, 1},
                            {0, 0, -1, -1}, {0, 0, 1, 1}, {-1, 0, 0, 0}, {1, 0, 0, 0},
                            {0, -1, 0, 0}, {0, 1, 0, 0},  {-1, -1, 0, 0}, {1, 1, 0, 0}};
    for (const auto& mv : moves) {
      if (try_order(o.p + mv[0], o.q + mv[1], o.P + mv[2], o.Q + mv[3], o.constant)) {
        improved = true;
        break;
      }
    }
    if (!improved && try_order(o.p, o.q, o.P, o.Q, !o.constant)) improved = true;
  }

  auto refined = fit_arima(y, best->order, ArimaFitMethod::css_then_ml);
  if (refined) return refined;
  return best;
}

void arima_forecast(const ArimaModel& model, std::span<const double> y, int horizon,
                    std::vector<double>& point, std::vector<double>& sd) {
  const ArimaOrder& o = model.order;
  const int m = std::max(1, o.period);
  const auto hc = static_cast<std::size_t>(horizon);
  std::vector<double> w = differenced(y, o.d, o.D, m);
  const auto a_dense = expand(model.ar, model.sar, m, -1.0);
  const auto b_dense = expand(model.ma, model.sma, m, 1.0);
  const auto a = sparse(a_dense);
  const auto b = sparse(b_dense);
  const std::size_t start = static_cast<std::size_t>(o.p + o.P * m);
  std::vector<double> e;
  css_residuals(w, model.mean, a, b, std::min(start, w.size()), e);

  const std::size_t n = w.size();
  for (std::size_t h = 0; h < hc; ++h) {
    const std::size_t t = n + h;
    double v = model.mean;
    for (const Lag& l : a) {
      if (t >= l.lag) v += l.coef * (w[t - l.lag] - model.mean);
    }
    for (const Lag& l : b) {
      if (t >= l.lag && t - l.lag < n) v += l.coef * e[t - l.lag];
    }
    w.push_back(v);
    e.push_back(0.0);
  }

  // Differencing polynomial delta(B) = (1 - B)^d (1 - B^m)^D as 1 + sum delta_i B^i.
  std::vector<double> delta{1.0};
  auto multiply = [](const std::vector<double>& p, std::size_t lag) {
    std::vector<double> out(p.size() + lag, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      out[i] += p[i];
      out[i + lag] -= p[i];
    }
    return out;
  };
  for (int i = 0; i < o.d; ++i) delta = multiply(delta, 1);
  for (int i = 0; i < o.D; ++i) delta = multiply(delta, static_cast<std::size_t>(m));

  std::vector<double> path(y.begin(), y.end());
  point.assign(hc, 0.0);
  for (std::size_t h = 0; h < hc; ++h) {
    double v = w[n + h];
    for (std::size_t i = 1; i < delta.size(); ++i) v -= delta[i] * path[path.size() - i];
    path.push_back(v);
    point[h] = v;
  }

  // psi weights of phi*(B) delta(B) against theta*(B).
  std::vector<double> full_ar_poly(1 + a_dense.size(), 0.0);  // 1 - sum a_k B^k
  full_ar_poly[0] = 1.0;
  for (std::size_t k = 0; k < a_dense.size(); ++k) full_ar_poly[k + 1] = -a_dense[k];
  std::vector<double> combined(full_ar_poly.size() + delta.size() - 1, 0.0);
  for (std::size_t i = 0; i < full_ar_poly.size(); ++i) {
    for (std::size_t j = 0; j < delta.size(); ++j) combined[i + j] += full_ar_poly[i] * delta[j];
  }
  std::vector<double> psi(hc, 0.0);
  psi[0] = 1.0;
  for (std::size_t j = 1; j < hc; ++j) {
    double v = j <= b_dense.size() ? b_dense[j - 1] : 0.0;
    for (std::size_t i = 1; i <= std::min(j, combined.size() - 1); ++i) v -= combined[i] * psi[j - i];
    psi[j] = v;
  }
  sd.assign(hc, 0.0);
  double cum = 0.0;
  for (std::size_t h = 0; h < hc; ++h) {
    cum += psi[h] * psi[h];
    sd[h] = std::sqrt(model.sigma2 * cum);
  }
}

MethodForecast auto_arima(const TimeSeries& train, int horizon, const MethodContext& ctx) {
  const auto y = train.values();
  if (y.size() < 8) throw Error(ErrorKind::series_too_short, "auto_arima needs T >= 8");
  std::optional<ArimaModel> model;
  if (is_constant(y)) {
    ArimaModel flat;
    flat.order = ArimaOrder{0, 0, 0, 0, 0, 0, std::max(1, train.period()), true};
    flat.mean = y.front();
    flat.sigma2 = 0.0;
    flat.n_used = y.size();
    model = flat;
  } else {
    model = select_arima(y, train.period());
  }
  if (!model) {
    MethodForecast out = rw_drift(train, horizon, ctx);
    out.method_id = "auto_arima";
    return out;
  }
  std::vector<double> point;
  std::vector<double> sd;
  arima_forecast(*model, y, horizon, point, sd);
  MethodForecast out;
  out.method_id = "auto_arima";
  out.fitted_by = "auto_arima";
  out.point = std::move(point);
  out.bands = gaussian_bands(out.point, sd, ctx.levels);
  if (!out.all_finite()) {
    out = rw_drift(train, horizon, ctx);
    out.method_id = "auto_arima";
  }
  return out;
}

ForecastResult forecast_auto_arima(const TimeSeries& train, int horizon, double level) {
  return auto_arima(train, horizon, MethodContext{{level}, 0}).at_level(level);
}

}  // namespace divcomb::methods
