#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "divcomb/core/types.hpp"

namespace divcomb::pipeline {

struct Rejected {
  std::string series_id;
  std::string kind;
  std::string message;
};

struct IngestResult {
  std::vector<TimeSeries> series;  // sorted by id
  /// Held-out actuals keyed by id (empty without a test file).
  std::map<std::string, std::vector<double>> actuals;
  /// Series dropped by the ingestion length rule.
  std::vector<Rejected> rejected;
};

/// Splits one CSV line (double quotes, "" escapes).
std::vector<std::string> split_csv_line(const std::string& line);

/// Locale-independent parse of a full cell. nullopt for non-numeric text.
std::optional<double> parse_number(std::string_view cell);

/// Wide M4 layout: header row, then `id, v1, v2, ...` with ragged trailing
/// blanks. Throws Error(duplicate_id), Error(unparsable_value) naming
/// row/column, Error(missing_test_row).
IngestResult ingest_m4(std::istream& train, std::istream* test, const Frequency& frequency,
                       std::optional<int> horizon = std::nullopt);
IngestResult ingest_m4_files(const std::filesystem::path& train,
                             const std::optional<std::filesystem::path>& test,
                             const Frequency& frequency, std::optional<int> horizon = std::nullopt);

/// Long layout: header `id,index,value`, integer index contiguous per id
/// after sorting. Leading missing values (empty or NA) are trimmed.
/// Throws Error(non_contiguous_index), Error(unparsable_value).
IngestResult ingest_long(std::istream& in, const Frequency& frequency,
                         std::optional<int> horizon = std::nullopt);
/// Long-format actuals: id -> values ordered by index.
std::map<std::string, std::vector<double>> ingest_long_actuals(std::istream& in);

}  // namespace divcomb::pipeline
