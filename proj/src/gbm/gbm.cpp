#include "divcomb/gbm/gbm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <thread>

#include "divcomb/core/error.hpp"

namespace divcomb::gbm {

void TrainingSet::validate() const {
  if (rows < 1) throw Error(ErrorKind::empty_training_set, "training set has no rows");
  if (methods < 2) throw Error(ErrorKind::invalid_argument, "need at least two methods");
  if (x.size() != rows * features || e.size() != rows * methods) {
    throw Error(ErrorKind::length_mismatch, "training matrices do not match their shape");
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(ErrorKind::invalid_argument, "non-finite feature value");
  }
  for (double v : e) {
    if (!std::isfinite(v)) throw Error(ErrorKind::invalid_argument, "non-finite cost value");
  }
}

void GbmParams::validate() const {
  auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
  if (rounds < 0 || max_depth < 0 || !in_unit(learning_rate) || min_child_hessian < 0.0 ||
      !in_unit(row_subsample) || !in_unit(col_subsample) || l2_leaf_penalty < 0.0 ||
      !(hessian_floor > 0.0) || !(validation_fraction > 0.0 && validation_fraction < 1.0) ||
      patience < 1 || threads < 1) {
    throw Error(ErrorKind::invalid_config, "gbm parameters out of range");
  }
}

void to_json(nlohmann::json& j, const GbmParams& p) {
  j = nlohmann::json{{"rounds", p.rounds},
                     {"learning_rate", p.learning_rate},
                     {"max_depth", p.max_depth},
                     {"min_child_hessian", p.min_child_hessian},
                     {"row_subsample", p.row_subsample},
                     {"col_subsample", p.col_subsample},
                     {"l2_leaf_penalty", p.l2_leaf_penalty},
                     {"hessian_floor", p.hessian_floor},
                     {"seed", p.seed},
                     {"early_stopping", p.early_stopping},
                     {"validation_fraction", p.validation_fraction},
                     {"patience", p.patience}};
}

void from_json(const nlohmann::json& j, GbmParams& p) {
  static const char* known[] = {"rounds",         "learning_rate",  "max_depth",
                                "min_child_hessian", "row_subsample", "col_subsample",
                                "l2_leaf_penalty", "hessian_floor", "seed",
                                "early_stopping", "validation_fraction", "patience",
                                "threads"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw Error(ErrorKind::invalid_config, "unknown gbm key '" + key + "'");
    }
  }
  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("rounds", p.rounds);
  get("learning_rate", p.learning_rate);
  get("max_depth", p.max_depth);
  get("min_child_hessian", p.min_child_hessian);
  get("row_subsample", p.row_subsample);
  get("col_subsample", p.col_subsample);
  get("l2_leaf_penalty", p.l2_leaf_penalty);
  get("hessian_floor", p.hessian_floor);
  get("seed", p.seed);
  get("early_stopping", p.early_stopping);
  get("validation_fraction", p.validation_fraction);
  get("patience", p.patience);
  get("threads", p.threads);
}

double Tree::predict(std::span<const double> x) const {
  if (nodes.empty()) return 0.0;
  int at = 0;
  while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
    const Node& n = nodes[static_cast<std::size_t>(at)];
    at = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(at)].value;
}

WeightModel uniform_model(std::vector<std::string> methods, std::size_t feature_count) {
  WeightModel model;
  model.methods = std::move(methods);
  model.feature_count = feature_count;
  model.params.rounds = 0;
  return model;
}

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> w(scores.size());
  if (scores.empty()) return w;
  const double top = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    w[i] = std::exp(scores[i] - top);
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

double loss(std::span<const double> scores, std::span<const double> e, std::size_t methods) {
  if (scores.size() != e.size() || methods == 0 || scores.size() % methods != 0) {
    throw Error(ErrorKind::length_mismatch, "scores and costs differ in shape");
  }
  double total = 0.0;
  for (std::size_t off = 0; off < scores.size(); off += methods) {
    const auto p = softmax(scores.subspan(off, methods));
    for (std::size_t i = 0; i < methods; ++i) total += p[i] * e[off + i];
  }
  return total;
}

std::pair<std::vector<double>, std::vector<double>> gradient_hessian(
    std::span<const double> scores, std::span<const double> e, double hessian_floor) {
  if (scores.size() != e.size()) throw Error(ErrorKind::length_mismatch, "scores and costs differ");
  const auto p = softmax(scores);
  double lbar = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) lbar += p[i] * e[i];
  std::vector<double> g(p.size());
  std::vector<double> h(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    g[i] = p[i] * (e[i] - lbar);
    h[i] = std::max(g[i] * (1.0 - 2.0 * p[i]), hessian_floor);
  }
  return {std::move(g), std::move(h)};
}

namespace {

// Level-wise exact greedy builder over pre-sorted feature columns.
class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& data, const std::vector<std::vector<std::uint32_t>>& sorted,
              const GbmParams& params)
      : data_(data), sorted_(sorted), params_(params) {}

  Tree build(std::span<const double> g, std::span<const double> h,
             const std::vector<std::uint32_t>& rows, const std::vector<std::size_t>& features) const {
    Tree tree;
    std::vector<int> position(data_.rows, -1);
    double g0 = 0.0;
    double h0 = 0.0;
    for (auto r : rows) {
      position[r] = 0;
      g0 += g[r];
      h0 += h[r];
    }
    tree.nodes.push_back(Node{});
    std::vector<Stats> frontier{{0, g0, h0}};
    const double lambda = params_.l2_leaf_penalty;

    for (int depth = 0; depth < params_.max_depth && !frontier.empty(); ++depth) {
      // Per frontier node: best split found so far.
      std::vector<Split> best(frontier.size());
      std::vector<int> slot(tree.nodes.size(), -1);
      for (std::size_t k = 0; k < frontier.size(); ++k) slot[static_cast<std::size_t>(frontier[k].node)] = static_cast<int>(k);

      for (std::size_t f : features) {
        std::vector<Scan> scan(frontier.size());
        for (std::uint32_t r : sorted_[f]) {
          const int node = position[r];
          if (node < 0) continue;
          const int k = slot[static_cast<std::size_t>(node)];
          if (k < 0) continue;
          Scan& s = scan[static_cast<std::size_t>(k)];
          const double v = data_.x[r * data_.features + f];
          if (s.seen && v > s.last) {
            const Stats& st = frontier[static_cast<std::size_t>(k)];
            const double gr = st.g - s.g;
            const double hr = st.h - s.h;
            if (s.h >= params_.min_child_hessian && hr >= params_.min_child_hessian) {
              const double gain = 0.5 * (s.g * s.g / (s.h + lambda) + gr * gr / (hr + lambda) -
                                         st.g * st.g / (st.h + lambda));
              Split& b = best[static_cast<std::size_t>(k)];
              if (gain > b.gain) {
                b.gain = gain;
                b.feature = static_cast<int>(f);
                b.threshold = s.last + 0.5 * (v - s.last);
                b.gl = s.g;
                b.hl = s.h;
              }
            }
          }
          s.seen = true;
          s.last = v;
          s.g += g[r];
          s.h += h[r];
        }
      }

      std::vector<Stats> next;
      for (std::size_t k = 0; k < frontier.size(); ++k) {
        const Split& b = best[k];
        if (b.feature < 0 || !(b.gain > 1e-12)) continue;
        const int parent = frontier[k].node;
        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(Node{});
        tree.nodes.push_back(Node{});
        Node& pn = tree.nodes[static_cast<std::size_t>(parent)];
        pn.feature = b.feature;
        pn.threshold = b.threshold;
        pn.left = left;
        pn.right = left + 1;
        next.push_back({left, b.gl, b.hl});
        next.push_back({left + 1, frontier[k].g - b.gl, frontier[k].h - b.hl});
      }
      if (next.empty()) break;
      for (auto r : rows) {
        const int node = position[r];
        const Node& n = tree.nodes[static_cast<std::size_t>(node)];
        if (n.feature >= 0) {
          position[r] = data_.x[r * data_.features + static_cast<std::size_t>(n.feature)] < n.threshold
                            ? n.left
                            : n.right;
        }
      }
      frontier = std::move(next);
    }

    // Leaf values from the final sums.
    std::vector<double> gs(tree.nodes.size(), 0.0);
    std::vector<double> hs(tree.nodes.size(), 0.0);
    for (auto r : rows) {
      gs[static_cast<std::size_t>(position[r])] += g[r];
      hs[static_cast<std::size_t>(position[r])] += h[r];
    }
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      if (tree.nodes[i].feature < 0) {
        tree.nodes[i].value = -gs[i] / (hs[i] + lambda) * params_.learning_rate;
      }
    }
    return tree;
  }

 private:
  struct Stats {
    int node;
    double g;
    double h;
  };
  struct Split {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
    double gl = 0.0;
    double hl = 0.0;
  };
  struct Scan {
    bool seen = false;
    double last = 0.0;
    double g = 0.0;
    double h = 0.0;
  };

  const TrainingSet& data_;
  const std::vector<std::vector<std::uint32_t>>& sorted_;
  const GbmParams& params_;
};

std::vector<std::uint32_t> sample_indices(std::size_t n, double fraction, std::mt19937_64& rng) {
  std::vector<std::uint32_t> all(n);
  std::iota(all.begin(), all.end(), 0u);
  if (fraction >= 1.0) return all;
  const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
  // Partial Fisher-Yates with an explicit draw keeps results independent of
  // the standard library's shuffle implementation.
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(all[i], all[j]);
  }
  all.resize(keep);
  std::sort(all.begin(), all.end());
  return all;
}

bool rows_constant(const TrainingSet& data) {
  for (std::size_t n = 0; n < data.rows; ++n) {
    const auto row = data.e_row(n);
    for (double v : row) {
      if (v != row[0]) return false;
    }
  }
  return true;
}

}  // namespace

WeightModel fit(const TrainingSet& data, const GbmParams& params,
                std::vector<std::string> method_ids) {
  data.validate();
  params.validate();
  if (method_ids.empty()) {
    for (std::size_t i = 0; i < data.methods; ++i) method_ids.push_back("m" + std::to_string(i + 1));
  }
  if (method_ids.size() != data.methods) {
    throw Error(ErrorKind::length_mismatch, "method ids do not match the cost matrix");
  }
  WeightModel model;
  model.params = params;
  model.methods = std::move(method_ids);
  model.feature_count = data.features;
  const std::size_t n_rows = data.rows;
  const std::size_t m = data.methods;

  std::vector<double> scores(n_rows * m, 0.0);
  model.loss_history.push_back(loss(scores, data.e, m));
  if (rows_constant(data)) {
    model.degenerate_training = true;
    model.params.rounds = 0;
    return model;
  }

  std::mt19937_64 rng(params.seed);
  // Optional validation split for early stopping.
  std::vector<char> is_train(n_rows, 1);
  std::vector<std::uint32_t> valid_rows;
  if (params.early_stopping && n_rows >= 10) {
    auto held = sample_indices(n_rows, params.validation_fraction, rng);
    for (auto r : held) is_train[r] = 0;
    valid_rows = std::move(held);
  }

  std::vector<std::vector<std::uint32_t>> sorted(data.features);
  for (std::size_t f = 0; f < data.features; ++f) {
    auto& col = sorted[f];
    for (std::uint32_t r = 0; r < n_rows; ++r) {
      if (is_train[r]) col.push_back(r);
    }
    std::stable_sort(col.begin(), col.end(), [&](std::uint32_t a, std::uint32_t b) {
      return data.x[a * data.features + f] < data.x[b * data.features + f];
    });
  }
  std::vector<std::uint32_t> train_rows;
  for (std::uint32_t r = 0; r < n_rows; ++r) {
    if (is_train[r]) train_rows.push_back(r);
  }

  const TreeBuilder builder(data, sorted, params);
  std::vector<double> grad(m * n_rows);  // column-major per method
  std::vector<double> hess(m * n_rows);
  double best_valid = std::numeric_limits<double>::infinity();
  std::size_t best_round = 0;
  int since_best = 0;

  auto valid_loss = [&]() {
    double total = 0.0;
    for (auto r : valid_rows) {
      const auto p = softmax(std::span<const double>(scores).subspan(r * m, m));
      for (std::size_t i = 0; i < m; ++i) total += p[i] * data.e[r * m + i];
    }
    return total;
  };

  for (int round = 0; round < params.rounds; ++round) {
    for (std::size_t r = 0; r < n_rows; ++r) {
      auto [g, h] = gradient_hessian(std::span<const double>(scores).subspan(r * m, m),
                                     data.e_row(r), params.hessian_floor);
      for (std::size_t i = 0; i < m; ++i) {
        grad[i * n_rows + r] = g[i];
        hess[i * n_rows + r] = h[i];
      }
    }
    auto rows = sample_indices(train_rows.size(), params.row_subsample, rng);
    for (auto& r : rows) r = train_rows[r];
    std::vector<std::vector<std::size_t>> feature_sets(m);
    for (std::size_t i = 0; i < m; ++i) {
      for (auto f : sample_indices(data.features, params.col_subsample, rng)) feature_sets[i].push_back(f);
    }

    std::vector<Tree> trees(m);
    auto work = [&](std::size_t i) {
      trees[i] = builder.build(std::span<const double>(grad).subspan(i * n_rows, n_rows),
                               std::span<const double>(hess).subspan(i * n_rows, n_rows), rows,
                               feature_sets[i]);
    };
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(params.threads), m);
    if (workers <= 1) {
      for (std::size_t i = 0; i < m; ++i) work(i);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
          for (std::size_t i = t; i < m; i += workers) work(i);
        });
      }
      for (auto& th : pool) th.join();
    }
    for (std::size_t r = 0; r < n_rows; ++r) {
      for (std::size_t i = 0; i < m; ++i) scores[r * m + i] += trees[i].predict(data.x_row(r));
    }
    model.trees.push_back(std::move(trees));
    model.loss_history.push_back(loss(scores, data.e, m));

    if (!valid_rows.empty()) {
      const double v = valid_loss();
      if (v < best_valid) {
        best_valid = v;
        best_round = model.trees.size();
        since_best = 0;
      } else if (++since_best >= params.patience) {
        break;
      }
    }
  }
  if (!valid_rows.empty()) {
    model.trees.resize(best_round);
    model.loss_history.resize(best_round + 1);
  }
  model.params.rounds = static_cast<int>(model.trees.size());
  return model;
}

std::vector<double> predict_scores(const WeightModel& model, std::span<const double> x) {
  if (x.size() != model.feature_count) {
    throw Error(ErrorKind::feature_length_mismatch,
                "expected " + std::to_string(model.feature_count) + " features, got " +
                    std::to_string(x.size()));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(ErrorKind::invalid_argument, "non-finite feature value");
  }
  std::vector<double> scores(model.method_count(), 0.0);
  for (const auto& round : model.trees) {
    for (std::size_t i = 0; i < round.size(); ++i) scores[i] += round[i].predict(x);
  }
  return scores;
}

std::vector<double> predict_weights(const WeightModel& model, std::span<const double> x) {
  return softmax(predict_scores(model, x));
}

nlohmann::json model_to_json(const WeightModel& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& round : model.trees) {
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& tree : round) {
      nlohmann::json jt = nlohmann::json::array();
      for (const auto& n : tree.nodes) {
        if (n.feature < 0) {
          jt.push_back({{"leaf", n.value}});
        } else {
          jt.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
        }
      }
      jr.push_back(std::move(jt));
    }
    trees.push_back(std::move(jr));
  }
  return nlohmann::json{{"format_version", model.format_version},
                        {"params", model.params},
                        {"methods", model.methods},
                        {"feature_count", model.feature_count},
                        {"degenerate_training", model.degenerate_training},
                        {"loss_history", model.loss_history},
                        {"trees", std::move(trees)}};
}

WeightModel model_from_json(const nlohmann::json& j) {
  const int version = j.at("format_version").get<int>();
  if (version != kFormatVersion) {
    throw Error(ErrorKind::format_version, "model format_version " + std::to_string(version) +
                                               " is not supported (expected " +
                                               std::to_string(kFormatVersion) + ")");
  }
  WeightModel model;
  model.params = j.at("params").get<GbmParams>();
  model.methods = j.at("methods").get<std::vector<std::string>>();
  model.feature_count = j.at("feature_count").get<std::size_t>();
  model.degenerate_training = j.value("degenerate_training", false);
  model.loss_history = j.value("loss_history", std::vector<double>{});
  for (const auto& jr : j.at("trees")) {
    std::vector<Tree> round;
    for (const auto& jt : jr) {
      Tree tree;
      for (const auto& jn : jt) {
        Node n;
        if (jn.contains("leaf")) {
          n.value = jn.at("leaf").get<double>();
        } else {
          n.feature = jn.at("feature").get<int>();
          n.threshold = jn.at("threshold").get<double>();
          n.left = jn.at("left").get<int>();
          n.right = jn.at("right").get<int>();
          if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= model.feature_count) {
            throw Error(ErrorKind::invalid_argument, "tree references an unknown feature");
          }
        }
        tree.nodes.push_back(n);
      }
      round.push_back(std::move(tree));
    }
    if (round.size() != model.methods.size()) {
      throw Error(ErrorKind::invalid_argument, "round does not hold one tree per method");
    }
    model.trees.push_back(std::move(round));
  }
  return model;
}

void save_model(const WeightModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << model_to_json(model).dump(1) << '\n';
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

WeightModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  try {
    return model_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::io, path.string() + ": " + e.what());
  }
}

}  // namespace divcomb::gbm
