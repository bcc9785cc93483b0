#include "divcomb/pipeline/runner.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "divcomb/eval/eval.hpp"

namespace divcomb::pipeline {

namespace fs = std::filesystem;

std::optional<Stage> parse_stage(std::string_view name) {
  if (name == "pool-forecast") return Stage::pool_forecast;
  if (name == "extract") return Stage::extract;
  if (name == "train") return Stage::train;
  if (name == "forecast") return Stage::forecast;
  if (name == "evaluate") return Stage::evaluate;
  if (name == "all") return Stage::all;
  return std::nullopt;
}

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::pool_forecast: return "pool-forecast";
    case Stage::extract: return "extract";
    case Stage::train: return "train";
    case Stage::forecast: return "forecast";
    case Stage::evaluate: return "evaluate";
    case Stage::all: return "all";
  }
  return "unknown";
}

std::vector<TimeSeries> sample_series(std::vector<TimeSeries> series, std::size_t size,
                                      std::uint64_t seed) {
  if (size == 0 || size >= series.size()) return series;
  std::sort(series.begin(), series.end(), [](const TimeSeries& a, const TimeSeries& b) { return a.id() < b.id(); });
  std::vector<std::size_t> idx(series.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(size);
  std::sort(idx.begin(), idx.end());
  std::vector<TimeSeries> out;
  out.reserve(size);
  for (auto i : idx) out.push_back(series[i]);
  return out;
}

namespace {

std::optional<fs::path> first_existing(std::initializer_list<fs::path> candidates) {
  for (const auto& p : candidates) {
    if (fs::is_regular_file(p)) return p;
  }
  return std::nullopt;
}

std::optional<fs::path> m4_file(const fs::path& dir, FrequencyLabel label, std::string_view part) {
  const std::string name = fmt::format("{}-{}.csv", frequency_file_stem(label), part);
  const std::string sub = part == "train" ? "Train" : "Test";
  return first_existing({dir / name, dir / sub / name});
}

std::vector<FrequencyLabel> requested_frequencies(const RunConfig& config) {
  std::vector<FrequencyLabel> out;
  if (config.frequencies.empty()) {
    out.assign(std::begin(kAllFrequencies), std::end(kAllFrequencies));
  } else {
    for (const auto& f : config.frequencies) out.push_back(*parse_frequency(f));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Frequency from a file name such as "Monthly-train.csv".
std::optional<FrequencyLabel> frequency_from_name(const fs::path& p) {
  const std::string stem = p.stem().string();
  const auto dash = stem.find('-');
  return parse_frequency(dash == std::string::npos ? stem : stem.substr(0, dash));
}

IngestResult ingest_any(const RunConfig& config, const fs::path& data, const std::optional<fs::path>& test,
                        const Frequency& frequency) {
  if (config.format == "m4") return ingest_m4_files(data, test, frequency, config.horizon);
  std::ifstream in(data, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + data.string());
  IngestResult out = ingest_long(in, frequency, config.horizon);
  if (test) {
    std::ifstream tin(*test, std::ios::binary);
    if (!tin) throw Error(ErrorKind::io, "cannot read " + test->string());
    auto actuals = ingest_long_actuals(tin);
    for (const auto& s : out.series) {
      const auto it = actuals.find(s.id());
      if (it == actuals.end()) throw Error(ErrorKind::missing_test_row, "no test rows for '" + s.id() + "'");
      out.actuals[s.id()] = it->second;
    }
  }
  return out;
}

// Pairs of (data file, test file) per frequency for a data/test location.
std::map<FrequencyLabel, std::pair<fs::path, std::optional<fs::path>>> locate(const RunConfig& config,
                                                                             const std::string& data,
                                                                             const std::string& test) {
  std::map<FrequencyLabel, std::pair<fs::path, std::optional<fs::path>>> out;
  const auto wanted = requested_frequencies(config);
  if (data.empty()) throw Error(ErrorKind::invalid_config, "no data path given");
  const fs::path dp(data);
  if (fs::is_directory(dp)) {
    if (config.format != "m4") throw Error(ErrorKind::invalid_config, "directory input requires the m4 format");
    for (auto label : wanted) {
      const auto train = m4_file(dp, label, "train");
      if (!train) continue;
      std::optional<fs::path> tp;
      if (!test.empty()) {
        tp = fs::is_directory(test) ? m4_file(test, label, "test") : std::optional<fs::path>(test);
      } else {
        tp = m4_file(dp, label, "test");
      }
      out[label] = {*train, tp};
    }
    if (out.empty()) throw Error(ErrorKind::io, "no <Frequency>-train.csv files under " + data);
    return out;
  }
  if (!fs::is_regular_file(dp)) throw Error(ErrorKind::io, "data path does not exist: " + data);
  std::optional<FrequencyLabel> label;
  if (config.frequencies.size() == 1) {
    label = parse_frequency(config.frequencies.front());
  } else if (config.frequencies.empty()) {
    label = frequency_from_name(dp);
  }
  if (!label) {
    throw Error(ErrorKind::invalid_config, "a single data file needs exactly one frequency (config or file name)");
  }
  out[*label] = {dp, test.empty() ? std::nullopt : std::optional<fs::path>(test)};
  return out;
}

}  // namespace

std::vector<FrequencyInput> load_inputs(const RunConfig& config) {
  std::vector<FrequencyInput> out;
  const auto located = locate(config, config.data, config.test_data);
  std::map<FrequencyLabel, std::pair<fs::path, std::optional<fs::path>>> reference;
  if (!config.reference_data.empty()) reference = locate(config, config.reference_data, "");
  for (const auto& [label, paths] : located) {
    const Frequency freq = config.frequency_for(label);
    FrequencyInput input{freq, ingest_any(config, paths.first, paths.second, freq), {}};
    input.data.series = sample_series(std::move(input.data.series), config.sample_size, config.sample_seed);
    if (config.reference_data.empty()) {
      input.reference = input.data.series;
    } else {
      const auto it = reference.find(label);
      if (it == reference.end()) {
        throw Error(ErrorKind::io, fmt::format("no reference data for {}", frequency_name(label)));
      }
      input.reference = ingest_any(config, it->second.first, std::nullopt, freq).series;
    }
    out.push_back(std::move(input));
  }
  return out;
}

namespace {

struct LogEntry {
  std::string series_id;
  std::string frequency;
  std::string stage;
  std::string kind;
  std::string message;
  bool policy = false;  // expected exclusion rather than a failure

  auto key() const { return std::tie(frequency, stage, series_id, kind, message); }
};

bool is_policy_kind(std::string_view kind) {
  return kind == "degenerate_scale" || kind == "degenerate_benchmark" || kind == "series_too_short" ||
         kind == "nonpositive_history_mean";
}

class Writer {
 public:
  Writer(fs::path dir, std::string hash) : dir_(std::move(dir)), hash_(std::move(hash)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create " + dir_.string() + ": " + ec.message());
  }

  fs::path csv(const std::string& name, const std::string& body) {
    return raw(name, "# run_manifest_sha256=" + hash_ + "\n" + body);
  }

  fs::path raw(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot write " + p.string());
    out << content;
    if (!out) throw Error(ErrorKind::io, "write failed for " + p.string());
    written_.push_back(p);
    return p;
  }

  void adopt(const std::vector<fs::path>& paths) { written_.insert(written_.end(), paths.begin(), paths.end()); }
  const fs::path& dir() const { return dir_; }
  const std::string& hash() const { return hash_; }
  std::vector<fs::path>& written() { return written_; }

 private:
  fs::path dir_;
  std::string hash_;
  std::vector<fs::path> written_;
};

std::string matrix_rows_csv(std::span<const ForecastMatrix> matrices) {
  std::string body = "series_id,method_id,step,point,lower,upper\n";
  for (const auto& fm : matrices) {
    const auto h = static_cast<std::size_t>(fm.horizon);
    for (std::size_t i = 0; i < fm.method_count(); ++i) {
      for (std::size_t k = 0; k < h; ++k) {
        body += fmt::format("{},{},{},{},{},{}\n", fm.series_id, fm.methods[i], k + 1, fm.point[i * h + k],
                            fm.lower[i * h + k], fm.upper[i * h + k]);
      }
    }
  }
  return body;
}

combiner::ExternalFeatures load_external(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path);
  combiner::ExternalFeatures ext;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_csv_line(line);
    if (ext.names.empty() && line_no >= 1 && ext.rows.empty() && cells.size() > 1 && !parse_number(cells[1])) {
      ext.names.assign(cells.begin() + 1, cells.end());
      continue;
    }
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const auto v = parse_number(cells[c]);
      if (!v) throw Error(ErrorKind::unparsable_value, fmt::format("{} row {}, column {}", path, line_no, c + 1));
      row.push_back(*v);
    }
    if (row.size() != ext.names.size()) {
      throw Error(ErrorKind::feature_length_mismatch, fmt::format("{} row {} has {} values", path, line_no, row.size()));
    }
    ext.rows[cells[0]] = std::move(row);
  }
  return ext;
}

// Everything computed for one frequency, built lazily.
class FrequencyRun {
 public:
  FrequencyRun(const RunConfig& config, const FrequencyInput& input, const methods::Pool& pool,
               const combiner::ExternalFeatures* external, std::vector<LogEntry>& log)
      : config_(config), input_(input), pool_(pool), log_(log) {
    options_.level = config.level;
    options_.threads = config.effective_threads();
    options_.seed = config.seed;
    options_.external = external;
    if (config.tradeoff) options_.extra_levels = eval::tradeoff_levels();
    tag_ = std::string(frequency_name(input.frequency.label));
    for (const auto& r : input.data.rejected) record({r.series_id, tag_, "ingest", r.kind, r.message});
  }

  const std::string& tag() const { return tag_; }

  combiner::TrainingResult& reference() {
    if (!reference_) {
      combiner::PhaseOptions opts = options_;
      opts.extra_levels.clear();
      reference_ = combiner::prepare_training(input_.reference, pool_, opts);
      for (const auto& f : reference_->excluded) record({f.series_id, tag_, "train", f.kind, f.message});
    }
    return *reference_;
  }

  const gbm::WeightModel& fit_model() {
    if (!model_) {
      auto& ref = reference();
      if (ref.data.rows == 0) {
        throw Error(ErrorKind::empty_training_set,
                    fmt::format("{}: all {} reference series were excluded", tag_, input_.reference.size()));
      }
      gbm::GbmParams p = config_.gbm;
      p.threads = config_.effective_threads();
      model_ = gbm::fit(ref.data, p, pool_.ids());
    }
    return *model_;
  }

  void use_model(gbm::WeightModel model) { model_ = std::move(model); }
  bool has_model() const { return model_.has_value(); }

  // Stages that only need pool output or features run phase 2 with the
  // uniform model; the features do not depend on the weights.
  void set_model_free(bool v) { model_free_ = v; }

  combiner::ForecastPhaseResult& phase2() {
    if (!phase2_) {
      const std::size_t extra = options_.external != nullptr ? options_.external->names.size() : 0;
      const gbm::WeightModel uniform =
          gbm::uniform_model(pool_.ids(), pool_.size() * (pool_.size() - 1) + extra);
      const gbm::WeightModel& model = model_free_ && !model_ ? uniform : fit_model();
      phase2_ = combiner::forecast_phase(model, input_.data.series, pool_, options_);
      for (const auto& f : phase2_->failures) record({f.series_id, tag_, "forecast", f.kind, f.message});
    }
    return *phase2_;
  }

  const combiner::PhaseOptions& options() const { return options_; }
  const FrequencyInput& input() const { return input_; }

  void record(LogEntry e) {
    e.policy = is_policy_kind(e.kind);
    log_.push_back(std::move(e));
  }

 private:
  const RunConfig& config_;
  const FrequencyInput& input_;
  const methods::Pool& pool_;
  std::vector<LogEntry>& log_;
  combiner::PhaseOptions options_;
  std::string tag_;
  std::optional<combiner::TrainingResult> reference_;
  std::optional<gbm::WeightModel> model_;
  std::optional<combiner::ForecastPhaseResult> phase2_;
  bool model_free_ = false;
};

void emit_pool(FrequencyRun& fr, Writer& w) {
  auto& ref = fr.reference();
  w.csv("pool_reference_" + fr.tag() + ".csv", matrix_rows_csv(ref.matrices));
  auto& p2 = fr.phase2();
  std::vector<ForecastMatrix> mats;
  for (std::size_t s = 0; s < p2.combined.size(); ++s) {
    mats.push_back(methods::to_matrix(p2.combined[s].series_id, p2.pool_forecasts[s], fr.options().level));
  }
  w.csv("pool_forecast_" + fr.tag() + ".csv", matrix_rows_csv(mats));
}

void emit_extract(FrequencyRun& fr, Writer& w, std::size_t m) {
  auto& ref = fr.reference();
  std::ostringstream a;
  diversity::write_features_csv(a, ref.features, m);
  w.csv("features_reference_" + fr.tag() + ".csv", a.str());
  std::ostringstream b;
  metrics::write_metrics_csv(b, ref.errors);
  w.csv("metrics_reference_" + fr.tag() + ".csv", b.str());
}

void emit_phase2_features(FrequencyRun& fr, Writer& w, std::size_t m) {
  std::ostringstream c;
  diversity::write_features_csv(c, fr.phase2().features, m);
  w.csv("features_forecast_" + fr.tag() + ".csv", c.str());
}

fs::path emit_model(FrequencyRun& fr, Writer& w) {
  auto j = gbm::model_to_json(fr.fit_model());
  j["run_manifest_sha256"] = w.hash();
  return w.raw("model_" + fr.tag() + ".json", j.dump(1) + "\n");
}

void emit_forecasts(FrequencyRun& fr, Writer& w) {
  auto& p2 = fr.phase2();
  std::ostringstream f;
  combiner::write_forecasts_csv(f, p2.combined);
  w.csv("forecasts_" + fr.tag() + ".csv", f.str());
  std::ostringstream wt;
  combiner::write_weights_csv(wt, p2.combined);
  w.csv("weights_" + fr.tag() + ".csv", wt.str());
  std::vector<combiner::CombinedForecast> sa;
  for (std::size_t s = 0; s < p2.combined.size(); ++s) {
    sa.push_back(combiner::simple_average(
        methods::to_matrix(p2.combined[s].series_id, p2.pool_forecasts[s], fr.options().level)));
  }
  std::ostringstream sf;
  combiner::write_forecasts_csv(sf, sa);
  w.csv("sa_forecasts_" + fr.tag() + ".csv", sf.str());
}

struct EvalAccumulator {
  std::vector<std::string> approaches;
  std::vector<eval::ApproachScores> scores;
  // For the overall MCB.
  std::vector<double> mase_rows;
  std::vector<double> msis_rows;
  std::size_t rows = 0;
};

void emit_evaluation(FrequencyRun& fr, Writer& w, const RunConfig& config, EvalAccumulator& acc) {
  auto& p2 = fr.phase2();
  const auto& actuals = fr.input().data.actuals;
  if (actuals.empty()) throw Error(ErrorKind::invalid_config, "evaluate needs --test-data for " + fr.tag());
  const std::size_t m = p2.combined.empty() ? 0 : p2.combined.front().methods.size();
  if (acc.approaches.empty()) {
    acc.approaches = {"Diversity", "SA"};
    for (const auto& id : config.pool) acc.approaches.push_back(id);
    for (const auto& a : acc.approaches) acc.scores.push_back({a, {}, {}, {}, {}});
  }
  const std::size_t k = acc.approaches.size();
  const double alpha = 1.0 - config.level;
  std::map<std::string, std::vector<double>> train_by_id;
  for (const auto& s : fr.input().data.series) train_by_id[s.id()] = {s.values().begin(), s.values().end()};

  std::vector<double> mase_rows;
  std::vector<double> msis_rows;
  std::vector<std::size_t> kept;
  std::string test_body = "series_id,approach,mase,msis\n";
  for (std::size_t s = 0; s < p2.combined.size(); ++s) {
    const auto& comb = p2.combined[s];
    const auto it = actuals.find(comb.series_id);
    if (it == actuals.end()) throw Error(ErrorKind::missing_test_row, "no actuals for " + comb.series_id);
    if (it->second.size() != comb.point.size()) {
      fr.record({comb.series_id, fr.tag(), "evaluate", "length_mismatch",
                 fmt::format("{} actuals for horizon {}", it->second.size(), comb.point.size())});
      continue;
    }
    const auto& train = train_by_id.at(comb.series_id);
    const auto fm = methods::to_matrix(comb.series_id, p2.pool_forecasts[s], config.level);
    const auto sa = combiner::simple_average(fm);
    std::vector<double> mase_row(k);
    std::vector<double> msis_row(k);
    try {
      const int period = fr.input().frequency.seasonal_period;
      auto score = [&](std::size_t a, std::span<const double> point, std::span<const double> lower,
                       std::span<const double> upper) {
        mase_row[a] = metrics::mase(train, it->second, point, period);
        msis_row[a] = metrics::msis(train, it->second, lower, upper, period, alpha);
      };
      score(0, comb.point, comb.lower, comb.upper);
      score(1, sa.point, sa.lower, sa.upper);
      for (std::size_t i = 0; i < m; ++i) score(2 + i, fm.point_row(i), fm.lower_row(i), fm.upper_row(i));
    } catch (const Error& e) {
      fr.record({comb.series_id, fr.tag(), "evaluate", std::string(error_kind_name(e.kind())), e.what()});
      continue;
    }
    kept.push_back(s);
    for (std::size_t a = 0; a < k; ++a) {
      auto& sc = acc.scores[a];
      sc.series_ids.push_back(comb.series_id);
      sc.frequencies.push_back(fr.tag());
      sc.mase.push_back(mase_row[a]);
      sc.msis.push_back(msis_row[a]);
      test_body += fmt::format("{},{},{},{}\n", comb.series_id, acc.approaches[a], mase_row[a], msis_row[a]);
    }
    mase_rows.insert(mase_rows.end(), mase_row.begin(), mase_row.end());
    msis_rows.insert(msis_rows.end(), msis_row.begin(), msis_row.end());
  }
  w.csv("metrics_test_" + fr.tag() + ".csv", test_body);
  acc.mase_rows.insert(acc.mase_rows.end(), mase_rows.begin(), mase_rows.end());
  acc.msis_rows.insert(acc.msis_rows.end(), msis_rows.begin(), msis_rows.end());
  acc.rows += kept.size();

  std::vector<eval::TradeoffCurve> curves;
  if (config.tradeoff && !kept.empty()) {
    const auto& levels = eval::tradeoff_levels();
    std::vector<std::vector<double>> trains;
    std::vector<std::vector<double>> acts;
    for (auto s : kept) {
      trains.push_back(train_by_id.at(p2.combined[s].series_id));
      acts.push_back(actuals.at(p2.combined[s].series_id));
    }
    std::vector<eval::TradeoffInput> inputs(k);
    for (std::size_t a = 0; a < k; ++a) {
      inputs[a].method = acc.approaches[a];
      inputs[a].levels = levels;
      inputs[a].upper.assign(levels.size(), {});
    }
    for (std::size_t l = 0; l < levels.size(); ++l) {
      for (auto s : kept) {
        const auto& comb = p2.combined[s];
        const auto fm = methods::to_matrix(comb.series_id, p2.pool_forecasts[s], levels[l]);
        inputs[0].upper[l].push_back(combiner::combine(fm, comb.weights).upper);
        inputs[1].upper[l].push_back(combiner::simple_average(fm).upper);
        for (std::size_t i = 0; i < m; ++i) {
          const auto row = fm.upper_row(i);
          inputs[2 + i].upper[l].emplace_back(row.begin(), row.end());
        }
      }
    }
    for (const auto& in : inputs) curves.push_back(eval::tradeoff(in, trains, acts));
    for (std::size_t s = 0; s < trains.size(); ++s) {
      double mean = 0.0;
      for (double v : trains[s]) mean += v;
      if (!(mean > 0.0)) {
        fr.record({p2.combined[kept[s]].series_id, fr.tag(), "tradeoff", "nonpositive_history_mean",
                   "excluded from the trade-off scaling"});
      }
    }
  }

  std::optional<eval::MethodRanks> mcb;
  if (kept.size() >= 2) {
    mcb = eval::mcb_test(mase_rows, kept.size(), k, config.mcb_alpha, acc.approaches);
    const auto ms = eval::mcb_test(msis_rows, kept.size(), k, config.mcb_alpha, acc.approaches);
    w.adopt(eval::emit_plots(w.dir(), fr.tag() + "_msis", &ms, {}, w.hash()));
  }
  w.adopt(eval::emit_plots(w.dir(), fr.tag(), mcb ? &*mcb : nullptr, curves, w.hash()));
}

std::string json_line(const LogEntry& e) {
  return nlohmann::json{{"series_id", e.series_id}, {"frequency", e.frequency}, {"stage", e.stage},
                        {"kind", e.kind}, {"message", e.message}, {"policy_exclusion", e.policy}}
             .dump();
}

}  // namespace

RunReport run(Stage stage, const RunConfig& config, std::ostream& log) {
  const methods::Pool pool(config.pool);
  const std::string hash = manifest_hash(config);
  Writer w(config.out, hash);
  std::optional<combiner::ExternalFeatures> external;
  if (!config.external_features.empty()) external = load_external(config.external_features);

  const auto inputs = load_inputs(config);
  std::vector<LogEntry> entries;
  std::map<std::string, std::string> model_hashes;
  std::map<std::string, std::size_t> counts;
  EvalAccumulator acc;
  const bool all = stage == Stage::all;

  for (const auto& input : inputs) {
    FrequencyRun fr(config, input, pool, external ? &*external : nullptr, entries);
    fr.set_model_free(stage == Stage::pool_forecast || stage == Stage::extract);
    counts[fr.tag()] = input.data.series.size();
    log << fmt::format("[{}] {} series ({} reference)\n", fr.tag(), input.data.series.size(), input.reference.size());
    const fs::path model_path = w.dir() / ("model_" + fr.tag() + ".json");
    const bool needs_saved_model = stage == Stage::forecast || stage == Stage::evaluate;
    if (needs_saved_model) {
      if (fs::is_regular_file(model_path)) {
        auto model = gbm::load_model(model_path);
        fr.use_model(std::move(model));
        model_hashes[fr.tag()] = sha256_file(model_path);
      } else if (stage == Stage::forecast) {
        throw Error(ErrorKind::io, "no trained model at " + model_path.string() + " (run `train` first)");
      }
    }
    if (stage == Stage::pool_forecast || all) emit_pool(fr, w);
    if (stage == Stage::extract || all) emit_extract(fr, w, pool.size());
    if (stage == Stage::train || all || (stage == Stage::evaluate && !fr.has_model())) {
      model_hashes[fr.tag()] = sha256_file(emit_model(fr, w));
    }
    if (stage == Stage::extract || all) emit_phase2_features(fr, w, pool.size());
    if (stage == Stage::forecast || all) emit_forecasts(fr, w);
    if (stage == Stage::evaluate || all) emit_evaluation(fr, w, config, acc);
  }

  if (stage == Stage::evaluate || all) {
    std::ostringstream s;
    eval::write_summary_csv(s, eval::summarize(acc.scores));
    w.csv("summary.csv", s.str());
    if (acc.rows >= 2 && inputs.size() > 1) {
      const auto mcb = eval::mcb_test(acc.mase_rows, acc.rows, acc.approaches.size(), config.mcb_alpha, acc.approaches);
      w.adopt(eval::emit_plots(w.dir(), "overall", &mcb, {}, w.hash()));
    }
  }

  std::sort(entries.begin(), entries.end(), [](const LogEntry& a, const LogEntry& b) { return a.key() < b.key(); });
  RunReport report;
  std::string exclusions = "series_id,frequency,stage,kind,message\n";
  std::string jsonl;
  for (const auto& e : entries) {
    std::string msg = e.message;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    exclusions += fmt::format("{},{},{},{},{}\n", e.series_id, e.frequency, e.stage, e.kind, msg);
    jsonl += json_line(e) + "\n";
    if (e.policy) {
      ++report.exclusions;
    } else {
      ++report.failures;
    }
  }
  w.csv("exclusions.csv", exclusions);
  w.raw("errors.jsonl", jsonl);

  auto cfg = config_to_json(config);
  cfg.erase("threads");
  cfg.erase("out");
  const nlohmann::json manifest{{"run_manifest_sha256", hash},
                                {"stage", std::string(stage_name(stage))},
                                {"config", cfg},
                                {"seed", config.seed},
                                {"sample_seed", config.sample_seed},
                                {"series", counts},
                                {"model_sha256", model_hashes},
                                {"failures", report.failures},
                                {"exclusions", report.exclusions}};
  w.raw("run_manifest.json", manifest.dump(1) + "\n");

  report.artifacts = w.written();
  report.exit_code = report.failures > 0 ? kExitPartial : kExitOk;
  log << fmt::format("{}: {} artifacts, {} exclusions, {} failures\n", stage_name(stage), report.artifacts.size(),
                     report.exclusions, report.failures);
  return report;
}

void log_fatal(const RunConfig& config, std::string_view kind, std::string_view message) {
  std::error_code ec;
  fs::create_directories(config.out, ec);
  std::ofstream out(fs::path(config.out) / "errors.jsonl", std::ios::app | std::ios::binary);
  if (!out) return;
  out << nlohmann::json{{"level", "fatal"}, {"kind", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace divcomb::pipeline
