#include "divcomb/eval/eval.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "divcomb/core/error.hpp"
#include "divcomb/metrics/metrics.hpp"

namespace divcomb::eval {

std::vector<SummaryRow> summarize(std::span<const ApproachScores> approaches) {
  std::vector<SummaryRow> out;
  if (approaches.empty()) return out;
  const auto& ref = approaches.front();
  for (const auto& a : approaches) {
    if (a.series_ids != ref.series_ids || a.mase.size() != a.series_ids.size() ||
        a.msis.size() != a.series_ids.size() || a.frequencies.size() != a.series_ids.size()) {
      throw Error(ErrorKind::misaligned_series, "approach '" + a.approach + "' covers different series");
    }
  }
  for (const auto& a : approaches) {
    std::map<std::string, SummaryRow> by_freq;
    SummaryRow overall{a.approach, "overall", 0, 0.0, 0.0};
    for (std::size_t n = 0; n < a.series_ids.size(); ++n) {
      SummaryRow& row = by_freq[a.frequencies[n]];
      row.approach = a.approach;
      row.frequency = a.frequencies[n];
      ++row.n;
      row.mean_mase += a.mase[n];
      row.mean_msis += a.msis[n];
      ++overall.n;
      overall.mean_mase += a.mase[n];
      overall.mean_msis += a.msis[n];
    }
    for (auto& [freq, row] : by_freq) {
      row.mean_mase /= static_cast<double>(row.n);
      row.mean_msis /= static_cast<double>(row.n);
      out.push_back(row);
    }
    if (overall.n > 0) {
      overall.mean_mase /= static_cast<double>(overall.n);
      overall.mean_msis /= static_cast<double>(overall.n);
    }
    out.push_back(overall);
  }
  return out;
}

double studentized_range_q(double alpha, std::size_t k) {
  // q_{alpha; K, inf} for K = 2..20.
  static constexpr std::array<double, 19> q01{
      3.642773, 4.120303, 4.402801, 4.602821, 4.757047, 4.882166, 4.987183, 5.077506, 5.156635, 5.226963,
      5.290196, 5.347592, 5.400105, 5.448476, 5.493291, 5.535020, 5.574047, 5.610690, 5.645215};
  static constexpr std::array<double, 19> q05{
      2.771808, 3.314493, 3.633160, 3.857656, 4.030092, 4.169554, 4.286309, 4.386509, 4.474124, 4.551864,
      4.621655, 4.684920, 4.742732, 4.795924, 4.845154, 4.890951, 4.933745, 4.973892, 5.011689};
  static constexpr std::array<double, 19> q10{
      2.326174, 2.902380, 3.240446, 3.478281, 3.660721, 3.808098, 3.931349, 4.037023, 4.129346, 4.211200,
      4.284635, 4.351158, 4.411913, 4.467782, 4.519464, 4.567519, 4.612403, 4.654494, 4.694104};
  if (k < 2 || k > 20) throw Error(ErrorKind::unsupported_k, fmt::format("no critical value for K = {}", k));
  const std::size_t i = k - 2;
  if (std::abs(alpha - 0.01) < 1e-12) return q01[i];
  if (std::abs(alpha - 0.05) < 1e-12) return q05[i];
  if (std::abs(alpha - 0.10) < 1e-12) return q10[i];
  throw Error(ErrorKind::unsupported_k, fmt::format("no critical value for alpha = {}", alpha));
}

bool MethodRanks::differs(std::size_t i, std::size_t j) const {
  return upper(i) < lower(j) || upper(j) < lower(i);
}

std::size_t MethodRanks::best() const {
  return static_cast<std::size_t>(std::min_element(mean_ranks.begin(), mean_ranks.end()) - mean_ranks.begin());
}

MethodRanks mcb_test(std::span<const double> errors, std::size_t n, std::size_t k, double alpha,
                     std::vector<std::string> methods) {
  if (n < 2) throw Error(ErrorKind::invalid_argument, "MCB needs at least two series");
  const double q = studentized_range_q(alpha, k);
  if (errors.size() != n * k) throw Error(ErrorKind::length_mismatch, "error matrix is not N x K");
  if (methods.empty()) {
    for (std::size_t i = 0; i < k; ++i) methods.push_back("m" + std::to_string(i + 1));
  }
  if (methods.size() != k) throw Error(ErrorKind::length_mismatch, "method names do not match K");
  MethodRanks out;
  out.methods = std::move(methods);
  out.n = n;
  out.alpha = alpha;
  out.ranks.assign(n * k, 0.0);
  out.mean_ranks.assign(k, 0.0);
  std::vector<std::size_t> order(k);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = errors.subspan(r * k, k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row[a] < row[b]; });
    for (std::size_t start = 0; start < k;) {
      std::size_t end = start + 1;
      while (end < k && row[order[end]] == row[order[start]]) ++end;
      const double avg = 0.5 * static_cast<double>(start + 1 + end);
      for (std::size_t t = start; t < end; ++t) out.ranks[r * k + order[t]] = avg;
      start = end;
    }
    for (std::size_t i = 0; i < k; ++i) out.mean_ranks[i] += out.ranks[r * k + i];
  }
  for (double& v : out.mean_ranks) v /= static_cast<double>(n);
  const double kk = static_cast<double>(k);
  out.half_width = 0.5 * q * std::sqrt(kk * (kk + 1.0) / (6.0 * static_cast<double>(n)));
  return out;
}

const std::vector<double>& tradeoff_levels() {
  static const std::vector<double> levels{0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 0.99};
  return levels;
}

TradeoffCurve tradeoff(const TradeoffInput& input, std::span<const std::vector<double>> train,
                       std::span<const std::vector<double>> actuals) {
  if (input.upper.size() != input.levels.size()) {
    throw Error(ErrorKind::length_mismatch, "one upper-bound set per level is required");
  }
  for (std::size_t l = 1; l < input.levels.size(); ++l) {
    if (!(input.levels[l] > input.levels[l - 1])) {
      throw Error(ErrorKind::invalid_argument, "trade-off levels must increase strictly");
    }
  }
  std::vector<std::size_t> kept;
  TradeoffCurve curve;
  curve.method = input.method;
  curve.levels = input.levels;
  for (std::size_t s = 0; s < train.size(); ++s) {
    double mean = 0.0;
    for (double v : train[s]) mean += v;
    if (train[s].empty() || !(mean / static_cast<double>(train[s].size()) > 0.0)) {
      ++curve.excluded;
    } else {
      kept.push_back(s);
    }
  }
  for (std::size_t l = 0; l < input.levels.size(); ++l) {
    const auto& ups = input.upper[l];
    if (ups.size() != train.size() || actuals.size() != train.size()) {
      throw Error(ErrorKind::length_mismatch, "trade-off inputs cover different series");
    }
    std::vector<std::vector<double>> a;
    std::vector<std::vector<double>> u;
    double pi = 0.0;
    for (auto s : kept) {
      a.push_back(actuals[s]);
      u.push_back(ups[s]);
      pi += metrics::scaled_upper_pi(train[s], ups[s]);
    }
    if (kept.empty()) {
      curve.coverage.push_back(std::nan(""));
      curve.scaled_pi.push_back(std::nan(""));
      continue;
    }
    curve.coverage.push_back(metrics::upper_coverage(a, u));
    curve.scaled_pi.push_back(pi / static_cast<double>(kept.size()));
  }
  return curve;
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
  out << "approach,frequency,n,mean_mase,mean_msis\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{}\n", r.approach, r.frequency, r.n, r.mean_mase, r.mean_msis);
  }
}

void write_mcb_csv(std::ostream& out, const MethodRanks& ranks) {
  out << "method,mean_rank,lower,upper,n,alpha,differs_from_best\n";
  const std::size_t best = ranks.best();
  for (std::size_t i = 0; i < ranks.methods.size(); ++i) {
    out << fmt::format("{},{},{},{},{},{},{}\n", ranks.methods[i], ranks.mean_ranks[i], ranks.lower(i),
                       ranks.upper(i), ranks.n, ranks.alpha, ranks.differs(i, best) ? 1 : 0);
  }
}

void write_tradeoff_csv(std::ostream& out, std::span<const TradeoffCurve> curves) {
  out << "method,level,upper_coverage,scaled_upper_pi,excluded\n";
  for (const auto& c : curves) {
    for (std::size_t l = 0; l < c.levels.size(); ++l) {
      out << fmt::format("{},{},{},{},{}\n", c.method, c.levels[l], c.coverage[l], c.scaled_pi[l], c.excluded);
    }
  }
}

namespace {

constexpr std::array<const char*, 10> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) { return fmt::format("{:.2f}", v); }

}  // namespace

std::string mcb_svg(const MethodRanks& ranks, const std::string& title) {
  const std::size_t k = ranks.methods.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ranks.mean_ranks[a] < ranks.mean_ranks[b]; });
  const double width = 640.0;
  const double left = 150.0;
  const double right = 30.0;
  const double top = 50.0;
  const double row_h = 28.0;
  const double height = top + row_h * static_cast<double>(k) + 50.0;
  double lo = 1e300;
  double hi = -1e300;
  for (std::size_t i = 0; i < k; ++i) {
    lo = std::min(lo, ranks.lower(i));
    hi = std::max(hi, ranks.upper(i));
  }
  const double pad = 0.05 * std::max(hi - lo, 1e-9);
  lo -= pad;
  hi += pad;
  auto xpos = [&](double v) { return left + (v - lo) / (hi - lo) * (width - left - right); };

  std::ostringstream svg;
  svg << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">)",
                     num(width), num(height), num(width), num(height))
      << '\n';
  svg << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n';
  svg << fmt::format(R"(<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>)",
                     num(width / 2), xml_escape(title))
      << '\n';
  const std::size_t best = ranks.best();
  svg << fmt::format(R"(<rect x="{}" y="{}" width="{}" height="{}" fill="#dddddd"/>)", num(xpos(ranks.lower(best))),
                     num(top - 10), num(xpos(ranks.upper(best)) - xpos(ranks.lower(best))),
                     num(row_h * static_cast<double>(k) + 10))
      << '\n';
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t i = order[r];
    const double y = top + row_h * (static_cast<double>(r) + 0.5);
    const char* color = ranks.differs(i, best) ? "#d62728" : "#1f77b4";
    svg << fmt::format(R"(<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="end">{} - {}</text>)",
                       num(left - 10), num(y + 4), xml_escape(ranks.methods[i]), num(ranks.mean_ranks[i]))
        << '\n';
    svg << fmt::format(R"(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="2"/>)",
                       num(xpos(ranks.lower(i))), num(y), num(xpos(ranks.upper(i))), num(y), color)
        << '\n';
    svg << fmt::format(R"(<circle cx="{}" cy="{}" r="4" fill="{}"/>)", num(xpos(ranks.mean_ranks[i])), num(y), color)
        << '\n';
  }
  const double axis_y = top + row_h * static_cast<double>(k) + 5;
  svg << fmt::format(R"(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>)", num(left), num(axis_y),
                     num(width - right), num(axis_y))
      << '\n';
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    svg << fmt::format(R"(<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>)",
                       num(xpos(v)), num(axis_y + 16), num(v))
        << '\n';
  }
  svg << fmt::format(R"(<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">mean rank (N = {}, alpha = {})</text>)",
                     num((left + width - right) / 2), num(axis_y + 36), ranks.n, ranks.alpha)
      << '\n';
  svg << "</svg>\n";
  return svg.str();
}

std::string tradeoff_svg(std::span<const TradeoffCurve> curves, const std::string& title) {
  const double width = 640.0;
  const double height = 460.0;
  const double left = 70.0;
  const double right = 170.0;
  const double top = 40.0;
  const double bottom = 60.0;
  double xlo = 1e300;
  double xhi = -1e300;
  double ylo = 1e300;
  double yhi = -1e300;
  for (const auto& c : curves) {
    for (std::size_t l = 0; l < c.levels.size(); ++l) {
      if (!std::isfinite(c.scaled_pi[l]) || !std::isfinite(c.coverage[l])) continue;
      xlo = std::min(xlo, c.scaled_pi[l]);
      xhi = std::max(xhi, c.scaled_pi[l]);
      ylo = std::min(ylo, c.coverage[l]);
      yhi = std::max(yhi, c.coverage[l]);
    }
  }
  if (xlo > xhi) {
    xlo = 0.0;
    xhi = 1.0;
    ylo = 0.0;
    yhi = 1.0;
  }
  const double xpad = std::max(0.05 * (xhi - xlo), 1e-3);
  const double ypad = std::max(0.05 * (yhi - ylo), 1e-3);
  xlo -= xpad;
  xhi += xpad;
  ylo -= ypad;
  yhi += ypad;
  auto xpos = [&](double v) { return left + (v - xlo) / (xhi - xlo) * (width - left - right); };
  auto ypos = [&](double v) { return height - bottom - (v - ylo) / (yhi - ylo) * (height - top - bottom); };

  std::ostringstream svg;
  svg << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">)",
                     num(width), num(height), num(width), num(height))
      << '\n';
  svg << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n';
  svg << fmt::format(R"(<text x="{}" y="22" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>)",
                     num((left + width - right) / 2), xml_escape(title))
      << '\n';
  svg << fmt::format(R"(<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>)", num(left), num(top),
                     num(width - left - right), num(height - top - bottom))
      << '\n';
  for (int t = 0; t <= 4; ++t) {
    const double xv = xlo + (xhi - xlo) * t / 4.0;
    const double yv = ylo + (yhi - ylo) * t / 4.0;
    svg << fmt::format(R"(<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>)",
                       num(xpos(xv)), num(height - bottom + 16), num(xv))
        << '\n';
    svg << fmt::format(R"(<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>)",
                       num(left - 6), num(ypos(yv) + 4), num(yv))
        << '\n';
  }
  svg << fmt::format(R"(<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">scaled upper prediction interval</text>)",
                     num((left + width - right) / 2), num(height - 20))
      << '\n';
  svg << fmt::format(R"svg(<text x="16" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">upper coverage</text>)svg",
                     num((top + height - bottom) / 2), num((top + height - bottom) / 2))
      << '\n';
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* color = kPalette[c % kPalette.size()];
    std::string points;
    for (std::size_t l = 0; l < curves[c].levels.size(); ++l) {
      if (!std::isfinite(curves[c].scaled_pi[l]) || !std::isfinite(curves[c].coverage[l])) continue;
      points += fmt::format("{},{} ", num(xpos(curves[c].scaled_pi[l])), num(ypos(curves[c].coverage[l])));
      svg << fmt::format(R"(<circle cx="{}" cy="{}" r="3" fill="{}"/>)", num(xpos(curves[c].scaled_pi[l])),
                         num(ypos(curves[c].coverage[l])), color)
          << '\n';
    }
    if (!points.empty()) points.pop_back();
    svg << fmt::format(R"(<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>)", points, color) << '\n';
    const double ly = top + 14.0 + 18.0 * static_cast<double>(c);
    svg << fmt::format(R"(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="2"/>)", num(width - right + 12),
                       num(ly), num(width - right + 32), num(ly), color)
        << '\n';
    svg << fmt::format(R"(<text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>)", num(width - right + 38),
                       num(ly + 4), xml_escape(curves[c].method))
        << '\n';
  }
  svg << "</svg>\n";
  return svg.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

std::string csv_with_manifest(const std::string& body, const std::string& hash) {
  return hash.empty() ? body : "# run_manifest_sha256=" + hash + "\n" + body;
}

}  // namespace

std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& dir,
                                              const std::string& tag, const MethodRanks* ranks,
                                              std::span<const TradeoffCurve> curves,
                                              const std::string& manifest_hash) {
  std::vector<std::filesystem::path> written;
  if (ranks == nullptr && curves.empty()) return written;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
  if (ranks != nullptr) {
    std::ostringstream csv;
    write_mcb_csv(csv, *ranks);
    written.push_back(dir / ("mcb_" + tag + ".csv"));
    write_file(written.back(), csv_with_manifest(csv.str(), manifest_hash));
    written.push_back(dir / ("mcb_" + tag + ".svg"));
    write_file(written.back(), mcb_svg(*ranks, "MCB test on ranks (" + tag + ")"));
  }
  if (!curves.empty()) {
    std::ostringstream csv;
    write_tradeoff_csv(csv, curves);
    written.push_back(dir / ("tradeoff_" + tag + ".csv"));
    write_file(written.back(), csv_with_manifest(csv.str(), manifest_hash));
    written.push_back(dir / ("tradeoff_" + tag + ".svg"));
    write_file(written.back(), tradeoff_svg(curves, "Upper coverage vs scaled upper PI (" + tag + ")"));
  }
  return written;
}

}  // namespace divcomb::eval
