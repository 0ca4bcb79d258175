#include "spatial_trust/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace spatial_trust::gbdt {

namespace {

// Splits must beat this gain to be taken.
constexpr double kMinSplitGain = 1e-12;
// Relative slack under which two gains are treated as tied.
constexpr double kGainTieTolerance = 1e-12;

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, const std::vector<double>& grad, const std::vector<double>& hess,
              const TrainConfig& config)
      : x_(x), grad_(grad), hess_(hess), config_(config) {}

  Tree build() {
    std::vector<std::size_t> all(x_.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    tree_.nodes.emplace_back();
    grow(0, all, 0);
    const TreeNode& root = tree_.nodes.front();
    if (root.is_leaf) {
      // No informative split at all: the tree contributes nothing.
      tree_.nodes.front().weight = 0.0;
    }
    return std::move(tree_);
  }

 private:
  void grow(int node_id, const std::vector<std::size_t>& rows, int depth) {
    double g = 0.0;
    double h = 0.0;
    for (std::size_t i : rows) {
      g += grad_[i];
      h += hess_[i];
    }

    SplitCandidate best;
    if (depth < config_.max_depth &&
        rows.size() >= 2 * static_cast<std::size_t>(std::max(1, config_.min_samples_leaf))) {
      best = find_split(rows, g, h);
    }

    if (best.feature < 0) {
      TreeNode& leaf = tree_.nodes[node_id];
      leaf.is_leaf = true;
      leaf.weight = leaf_weight(g, h, config_.l1_alpha, config_.l2_lambda);
      return;
    }

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (std::size_t i : rows) {
      (x_(i, best.feature) < best.threshold ? left_rows : right_rows).push_back(i);
    }

    const int left_id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const int right_id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    TreeNode& node = tree_.nodes[node_id];
    node.is_leaf = false;
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.gain = best.gain;
    node.left = left_id;
    node.right = right_id;

    grow(left_id, left_rows, depth + 1);
    grow(right_id, right_rows, depth + 1);
  }

  SplitCandidate find_split(const std::vector<std::size_t>& rows, double g_total, double h_total) const {
    const std::size_t min_leaf = static_cast<std::size_t>(std::max(1, config_.min_samples_leaf));
    SplitCandidate best;
    double best_gain = kMinSplitGain;
    std::vector<std::size_t> sorted = rows;
    for (std::size_t f = 0; f < x_.cols(); ++f) {
      std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        const double va = x_(a, f);
        const double vb = x_(b, f);
        return va != vb ? va < vb : a < b;
      });
      double g_left = 0.0;
      double h_left = 0.0;
      for (std::size_t k = 1; k < sorted.size(); ++k) {
        g_left += grad_[sorted[k - 1]];
        h_left += hess_[sorted[k - 1]];
        const double lo = x_(sorted[k - 1], f);
        const double hi = x_(sorted[k], f);
        if (lo == hi) continue;
        if (k < min_leaf || sorted.size() - k < min_leaf) continue;
        const double gain = split_gain(g_left, h_left, g_total - g_left, h_total - h_left, config_.l1_alpha,
                                       config_.l2_lambda);
        if (gain > best_gain + kGainTieTolerance * std::max(1.0, std::abs(best_gain))) {
          double t = lo + (hi - lo) / 2.0;
          if (!(t > lo)) t = hi;
          best = {static_cast<int>(f), t, gain};
          best_gain = gain;
        }
      }
    }
    return best;
  }

  const FeatureMatrix& x_;
  const std::vector<double>& grad_;
  const std::vector<double>& hess_;
  const TrainConfig& config_;
  Tree tree_;
};

template <typename T>
T json_get(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ModelFormatError(std::string("model file missing '") + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ModelFormatError(std::string("model field '") + key + "' has the wrong type");
  }
}

}  // namespace

void FeatureMatrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && data_.empty()) cols_ = values.size();
  if (values.size() != cols_) throw std::invalid_argument("row width does not match matrix");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> columns) const {
  FeatureMatrix out(rows_, columns.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (columns[c] >= cols_) throw std::out_of_range("column index out of range");
      out(r, c) = (*this)(r, columns[c]);
    }
  }
  return out;
}

void TrainConfig::validate() const {
  if (n_trees < 0) throw std::invalid_argument("n_trees must be >= 0");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (max_depth < 0) throw std::invalid_argument("max_depth must be >= 0");
  if (!(l1_alpha >= 0.0)) throw std::invalid_argument("l1_alpha must be >= 0");
  if (!(l2_lambda >= 0.0)) throw std::invalid_argument("l2_lambda must be >= 0");
  if (min_samples_leaf < 1) throw std::invalid_argument("min_samples_leaf must be >= 1");
}

double Tree::leaf_weight(std::span<const double> x) const {
  if (nodes.empty()) return 0.0;
  const TreeNode* n = &nodes.front();
  while (!n->is_leaf) n = &nodes[x[n->feature] < n->threshold ? n->left : n->right];
  return n->weight;
}

int Tree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> d(nodes.size(), 0);
  int max_d = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf) continue;
    d[nodes[i].left] = d[nodes[i].right] = d[i] + 1;
    max_d = std::max(max_d, d[i] + 1);
  }
  return max_d;
}

double GbdtModel::predict_logit(std::span<const double> x) const {
  if (x.size() != n_features) throw std::invalid_argument("feature vector width does not match model");
  double sum = 0.0;
  for (const Tree& t : trees) sum += t.leaf_weight(x);
  return logit(base_score) + config.learning_rate * sum;
}

double GbdtModel::predict_proba(std::span<const double> x) const { return sigmoid(predict_logit(x)); }

std::vector<double> GbdtModel::predict_proba(const FeatureMatrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict_proba(x.row(r));
  return out;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

double soft_threshold(double g, double alpha) {
  const double mag = std::max(0.0, std::abs(g) - alpha);
  return g < 0.0 ? -mag : mag;
}

double leaf_weight(double grad_sum, double hess_sum, double alpha, double lambda) {
  return -soft_threshold(grad_sum, alpha) / (hess_sum + lambda);
}

double split_gain(double g_left, double h_left, double g_right, double h_right, double alpha, double lambda) {
  auto score = [&](double g, double h) {
    const double t = soft_threshold(g, alpha);
    return t * t / (h + lambda);
  };
  return 0.5 * (score(g_left, h_left) + score(g_right, h_right) - score(g_left + g_right, h_left + h_right));
}

LossDerivatives logistic_loss(double s, bool y) {
  const double p = sigmoid(s);
  // log(1 + e^s) - y*s, written to stay finite for large |s|
  const double softplus = s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
  return {softplus - (y ? s : 0.0), p - (y ? 1.0 : 0.0), p * (1.0 - p)};
}

GbdtModel train(const FeatureMatrix& x, std::span<const std::uint8_t> labels, const TrainConfig& config,
                const TreeCallback& on_tree) {
  config.validate();
  if (x.rows() != labels.size()) throw TrainingError("feature and label counts differ");
  if (x.rows() < 2) throw TrainingError("training needs at least 2 samples");
  const auto positives = std::count_if(labels.begin(), labels.end(), [](std::uint8_t y) { return y != 0; });
  if (positives == 0 || static_cast<std::size_t>(positives) == labels.size()) {
    throw TrainingError("degenerate training set: labels contain a single class");
  }

  GbdtModel model;
  model.config = config;
  model.n_features = x.cols();

  const std::size_t n = x.rows();
  std::vector<double> logits(n, logit(model.base_score));
  std::vector<double> grad(n);
  std::vector<double> hess(n);
  for (int t = 0; t < config.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const LossDerivatives d = logistic_loss(logits[i], labels[i] != 0);
      grad[i] = d.grad;
      hess[i] = d.hess;
    }
    Tree tree = TreeBuilder(x, grad, hess, config).build();
    for (std::size_t i = 0; i < n; ++i) logits[i] += config.learning_rate * tree.leaf_weight(x.row(i));
    model.trees.push_back(std::move(tree));
    if (on_tree) on_tree(t, model.trees.back());
  }
  return model;
}

std::vector<double> feature_importance(const GbdtModel& model) {
  std::vector<double> gain(model.n_features, 0.0);
  for (const Tree& t : model.trees) {
    for (const TreeNode& node : t.nodes) {
      if (!node.is_leaf) gain[node.feature] += node.gain;
    }
  }
  const double total = std::accumulate(gain.begin(), gain.end(), 0.0);
  if (total > 0.0) {
    for (double& g : gain) g /= total;
  }
  return gain;
}

nlohmann::ordered_json model_to_json(const GbdtModel& model) {
  nlohmann::ordered_json j;
  j["version"] = kModelFormatVersion;
  j["base_score"] = model.base_score;
  j["n_features"] = model.n_features;
  j["feature_names"] = model.feature_names;
  j["decision_threshold"] =
      model.decision_threshold ? nlohmann::ordered_json(*model.decision_threshold) : nlohmann::ordered_json(nullptr);
  auto& c = j["config"];
  c["n_trees"] = model.config.n_trees;
  c["learning_rate"] = model.config.learning_rate;
  c["max_depth"] = model.config.max_depth;
  c["l1_alpha"] = model.config.l1_alpha;
  c["l2_lambda"] = model.config.l2_lambda;
  c["min_samples_leaf"] = model.config.min_samples_leaf;
  c["seed"] = model.config.seed;
  auto& trees = j["trees"];
  trees = nlohmann::ordered_json::array();
  for (const Tree& t : model.trees) {
    auto nodes = nlohmann::ordered_json::array();
    for (const TreeNode& node : t.nodes) {
      nlohmann::ordered_json jn;
      if (node.is_leaf) {
        jn["leaf"] = node.weight;
      } else {
        jn["feature"] = node.feature;
        jn["threshold"] = node.threshold;
        jn["left"] = node.left;
        jn["right"] = node.right;
        jn["gain"] = node.gain;
      }
      nodes.push_back(std::move(jn));
    }
    trees.push_back(std::move(nodes));
  }
  return j;
}

GbdtModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ModelFormatError("model file is not a JSON object");
  const int version = json_get<int>(j, "version");
  if (version != kModelFormatVersion) {
    throw ModelFormatError("unsupported model version " + std::to_string(version) + " (expected " +
                           std::to_string(kModelFormatVersion) + ")");
  }
  GbdtModel m;
  m.base_score = json_get<double>(j, "base_score");
  if (!(m.base_score > 0.0 && m.base_score < 1.0)) throw ModelFormatError("base_score must lie in (0,1)");
  m.n_features = json_get<std::size_t>(j, "n_features");
  m.feature_names = json_get<std::vector<std::string>>(j, "feature_names");
  if (!m.feature_names.empty() && m.feature_names.size() != m.n_features) {
    throw ModelFormatError("feature_names length does not match n_features");
  }
  if (auto it = j.find("decision_threshold"); it != j.end() && !it->is_null()) {
    m.decision_threshold = json_get<double>(j, "decision_threshold");
  }
  const auto& c = json_get<nlohmann::json>(j, "config");
  m.config.n_trees = json_get<int>(c, "n_trees");
  m.config.learning_rate = json_get<double>(c, "learning_rate");
  m.config.max_depth = json_get<int>(c, "max_depth");
  m.config.l1_alpha = json_get<double>(c, "l1_alpha");
  m.config.l2_lambda = json_get<double>(c, "l2_lambda");
  m.config.min_samples_leaf = json_get<int>(c, "min_samples_leaf");
  m.config.seed = json_get<std::uint64_t>(c, "seed");
  try {
    m.config.validate();
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(std::string("bad config: ") + e.what());
  }

  const auto& trees = json_get<nlohmann::json>(j, "trees");
  if (!trees.is_array()) throw ModelFormatError("'trees' must be an array");
  for (const auto& jt : trees) {
    if (!jt.is_array() || jt.empty()) throw ModelFormatError("each tree must be a non-empty node array");
    Tree t;
    const int size = static_cast<int>(jt.size());
    for (int i = 0; i < size; ++i) {
      const auto& jn = jt[i];
      TreeNode node;
      if (jn.contains("leaf")) {
        node.weight = json_get<double>(jn, "leaf");
      } else {
        node.is_leaf = false;
        node.feature = json_get<int>(jn, "feature");
        node.threshold = json_get<double>(jn, "threshold");
        node.left = json_get<int>(jn, "left");
        node.right = json_get<int>(jn, "right");
        node.gain = json_get<double>(jn, "gain");
        if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= m.n_features) {
          throw ModelFormatError("split feature index out of range");
        }
        // Children must come after their parent, which also rules out cycles.
        if (node.left <= i || node.right <= i || node.left >= size || node.right >= size) {
          throw ModelFormatError("child index out of range");
        }
      }
      t.nodes.push_back(node);
    }
    m.trees.push_back(std::move(t));
  }
  if (m.trees.size() > static_cast<std::size_t>(m.config.n_trees)) {
    throw ModelFormatError("more trees than config.n_trees");
  }
  return m;
}

void save_model(const GbdtModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write model '" + path + "'");
  out << model_to_json(model).dump(1) << '\n';
  if (!out) throw std::runtime_error("write failed for model '" + path + "'");
}

GbdtModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelFormatError(std::string("malformed model file: ") + e.what());
  }
  return model_from_json(j);
}

}  // namespace spatial_trust::gbdt
