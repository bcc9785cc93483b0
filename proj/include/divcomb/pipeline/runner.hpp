#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "divcomb/combiner/combiner.hpp"
#include "divcomb/pipeline/config.hpp"
#include "divcomb/pipeline/ingest.hpp"

namespace divcomb::pipeline {

enum class Stage { pool_forecast, extract, train, forecast, evaluate, all };

std::optional<Stage> parse_stage(std::string_view name);
std::string_view stage_name(Stage stage);

inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;

/// Inputs of one frequency class.
struct FrequencyInput {
  Frequency frequency;
  IngestResult data;
  /// Reference series for phase 1; the data series when no separate
  /// reference set is configured.
  std::vector<TimeSeries> reference;
};

/// Resolves the data paths of a configuration into per-frequency inputs
/// (sorted by frequency, series sorted by id, optional subsampling).
std::vector<FrequencyInput> load_inputs(const RunConfig& config);

/// Deterministic subset of `size` series (all when size is 0 or larger than
/// the input), kept in id order.
std::vector<TimeSeries> sample_series(std::vector<TimeSeries> series, std::size_t size,
                                      std::uint64_t seed);

struct RunReport {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> artifacts;
  std::size_t failures = 0;    // unexpected per-series failures
  std::size_t exclusions = 0;  // policy exclusions (degenerate scale, ...)
};

/// Runs one subcommand. Fatal problems throw divcomb::Error; per-series
/// problems are logged to <out>/errors.jsonl and reflected in exit_code.
RunReport run(Stage stage, const RunConfig& config, std::ostream& log);

/// Appends one JSON line describing a fatal error to <out>/errors.jsonl.
void log_fatal(const RunConfig& config, std::string_view kind, std::string_view message);

}  // namespace divcomb::pipeline
