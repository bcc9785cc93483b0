#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace divcomb {

enum class ErrorKind {
  invalid_argument,
  series_too_short,
  length_mismatch,
  degenerate_scale,
  degenerate_benchmark,
  empty_input,
  nonpositive_history_mean,
  feature_length_mismatch,
  empty_training_set,
  weight_length_mismatch,
  non_simplex_weights,
  misaligned_series,
  unsupported_k,
  duplicate_id,
  unparsable_value,
  missing_test_row,
  non_contiguous_index,
  invalid_config,
  format_version,
  io,
  method_failure,
};

std::string_view error_kind_name(ErrorKind kind) noexcept;

// Single exception type for the library; `kind()` lets callers branch on the
// failure class (e.g. excluding DegenerateScale series from training).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace divcomb
