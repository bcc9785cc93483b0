#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace divcomb::gbm {

inline constexpr int kFormatVersion = 1;

/// Row-major features X (N x F) and per-method costs E (N x M).
struct TrainingSet {
  std::size_t rows = 0;
  std::size_t features = 0;
  std::size_t methods = 0;
  std::vector<double> x;
  std::vector<double> e;

  std::span<const double> x_row(std::size_t n) const {
    return std::span<const double>(x).subspan(n * features, features);
  }
  std::span<const double> e_row(std::size_t n) const {
    return std::span<const double>(e).subspan(n * methods, methods);
  }
  /// Throws on shape errors, non-finite entries, N < 1 or M < 2.
  void validate() const;
};

struct GbmParams {
  int rounds = 150;
  double learning_rate = 0.05;
  int max_depth = 6;
  double min_child_hessian = 1e-3;
  double row_subsample = 0.9;
  double col_subsample = 0.9;
  double l2_leaf_penalty = 1.0;
  double hessian_floor = 1e-6;
  std::uint64_t seed = 0;
  bool early_stopping = false;
  double validation_fraction = 0.2;
  int patience = 10;
  int threads = 1;

  void validate() const;
};

void to_json(nlohmann::json& j, const GbmParams& p);
void from_json(const nlohmann::json& j, GbmParams& p);

struct Node {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] < threshold goes left
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct Tree {
  std::vector<Node> nodes;  // nodes[0] is the root
  double predict(std::span<const double> x) const;
};

struct WeightModel {
  int format_version = kFormatVersion;
  GbmParams params;
  std::vector<std::string> methods;
  std::size_t feature_count = 0;
  /// trees[round][method]
  std::vector<std::vector<Tree>> trees;
  /// Training loss before round 1 and after every round.
  std::vector<double> loss_history;
  bool degenerate_training = false;

  std::size_t method_count() const noexcept { return methods.size(); }
};

/// Zero-round model: uniform weights everywhere.
WeightModel uniform_model(std::vector<std::string> methods, std::size_t feature_count);

std::vector<double> softmax(std::span<const double> scores);

/// sum_n <softmax(scores_n), E_n> over row-major N x M inputs.
double loss(std::span<const double> scores, std::span<const double> e, std::size_t methods);

/// g_i = p_i (E_i - Lbar), h_i = max(p_i (E_i - Lbar)(1 - 2 p_i), floor).
std::pair<std::vector<double>, std::vector<double>> gradient_hessian(
    std::span<const double> scores, std::span<const double> e, double hessian_floor = 1e-6);

/// Boosts one tree per method per round against the softmax-weighted cost.
/// All-constant cost rows give the zero-round model flagged as degenerate.
WeightModel fit(const TrainingSet& data, const GbmParams& params,
                std::vector<std::string> method_ids = {});

/// Raw summed tree outputs.
std::vector<double> predict_scores(const WeightModel& model, std::span<const double> x);
/// softmax(predict_scores). Throws Error(feature_length_mismatch).
std::vector<double> predict_weights(const WeightModel& model, std::span<const double> x);

nlohmann::json model_to_json(const WeightModel& model);
/// Throws Error(format_version) on a version mismatch.
WeightModel model_from_json(const nlohmann::json& j);
void save_model(const WeightModel& model, const std::filesystem::path& path);
WeightModel load_model(const std::filesystem::path& path);

}  // namespace divcomb::gbm
