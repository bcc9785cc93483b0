#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "divcomb/core/types.hpp"
#include "divcomb/gbm/gbm.hpp"

namespace divcomb::pipeline {

struct RunConfig {
  /// M4 wide file, directory of `<Frequency>-train.csv` files, or a long CSV.
  std::string data;
  std::string test_data;
  /// Optional separate reference set for training (same layout as data).
  std::string reference_data;
  std::string format = "m4";  // "m4" or "long"
  /// Frequency names; empty means every frequency found under data.
  std::vector<std::string> frequencies;
  std::vector<std::string> pool;
  double level = 0.95;
  double mcb_alpha = 0.05;
  bool tradeoff = true;
  gbm::GbmParams gbm;
  int threads = 0;  // 0: hardware threads
  std::uint64_t seed = 42;
  std::string out = "out";
  std::map<std::string, int> seasonal_periods;
  std::optional<int> horizon;
  /// Random per-frequency subset size (0 keeps everything) and its seed.
  std::size_t sample_size = 0;
  std::uint64_t sample_seed = 0;
  /// CSV `series_id,<name>,...` appended to the diversity features.
  std::string external_features;

  int effective_threads() const;
  Frequency frequency_for(FrequencyLabel label) const;
};

/// Defaults; pool set to the canonical eight methods.
RunConfig default_config();

/// Strict parse: unknown keys raise Error(invalid_config).
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = default_config());
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const RunConfig& config);

/// SHA-256 (hex) of the result-determining configuration: everything except
/// the thread count and output directory.
std::string manifest_hash(const RunConfig& config);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace divcomb::pipeline
