#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace spatial_trust::gbdt {

// Dense row-major feature table.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  void append_row(std::span<const double> values);

  // Copy keeping only the listed columns, in order.
  FeatureMatrix select_columns(std::span<const std::size_t> columns) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct TrainConfig {
  int n_trees = 100;
  double learning_rate = 0.03;
  int max_depth = 3;
  double l1_alpha = 0.5;
  double l2_lambda = 2.0;
  int min_samples_leaf = 1;
  std::uint64_t seed = 0;  // recorded only; training has no randomness

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct TreeNode {
  bool is_leaf = true;
  int feature = -1;
  double threshold = 0.0;  // value < threshold goes left
  int left = -1;
  int right = -1;
  double gain = 0.0;
  double weight = 0.0;  // leaf only, before learning-rate shrinkage

  bool operator==(const TreeNode&) const = default;
};

// Node 0 is the root.
struct Tree {
  std::vector<TreeNode> nodes;

  double leaf_weight(std::span<const double> x) const;
  int depth() const;
  bool operator==(const Tree&) const = default;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kModelFormatVersion = 1;

struct GbdtModel {
  std::vector<Tree> trees;
  double base_score = 0.5;
  TrainConfig config;
  std::size_t n_features = 0;
  std::vector<std::string> feature_names;
  // Operating threshold picked on held-out data; not used by predict().
  std::optional<double> decision_threshold;

  double predict_logit(std::span<const double> x) const;
  double predict_proba(std::span<const double> x) const;
  std::vector<double> predict_proba(const FeatureMatrix& x) const;

  bool operator==(const GbdtModel&) const = default;
};

double sigmoid(double z);
double logit(double p);

// sign(g) * max(0, |g| - alpha)
double soft_threshold(double g, double alpha);

// -soft_threshold(G, alpha) / (H + lambda)
double leaf_weight(double grad_sum, double hess_sum, double alpha, double lambda);

// Second-order split gain with the L1-shrunk gradient sums.
double split_gain(double g_left, double h_left, double g_right, double h_right, double alpha,
                  double lambda);

// Logistic loss at logit s for label y, with its first and second derivative in s.
struct LossDerivatives {
  double loss;
  double grad;
  double hess;
};
LossDerivatives logistic_loss(double s, bool y);

// Called after each tree is appended; index is 0-based.
using TreeCallback = std::function<void(int index, const Tree& tree)>;

// Exact greedy second-order boosting. Throws TrainingError on size mismatch,
// fewer than two samples, or single-class labels ("degenerate training set").
GbdtModel train(const FeatureMatrix& x, std::span<const std::uint8_t> labels, const TrainConfig& config,
                const TreeCallback& on_tree = {});

// Gain-weighted share per feature; all zeros when no split exists.
std::vector<double> feature_importance(const GbdtModel& model);

nlohmann::ordered_json model_to_json(const GbdtModel& model);
GbdtModel model_from_json(const nlohmann::json& j);
void save_model(const GbdtModel& model, const std::string& path);
GbdtModel load_model(const std::string& path);

}  // namespace spatial_trust::gbdt
