#include "spatial_trust/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace spatial_trust {

namespace {

std::vector<std::string> default_feature_names() { return {kFeatureNames.begin(), kFeatureNames.end()}; }

double mean_logistic_loss(std::span<const double> logits, std::span<const std::uint8_t> labels) {
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) sum += gbdt::logistic_loss(logits[i], labels[i] != 0).loss;
  return logits.empty() ? 0.0 : sum / static_cast<double>(logits.size());
}

bool has_both_classes(std::span<const std::uint8_t> labels) {
  const auto pos = std::count_if(labels.begin(), labels.end(), [](auto y) { return y != 0; });
  return pos > 0 && static_cast<std::size_t>(pos) < labels.size();
}

double trim(double v) { return std::round(v * 1e12) / 1e12; }

}  // namespace

FeatureTable build_feature_table(const std::vector<Sample>& samples, const GeometryOptions& options) {
  FeatureTable t;
  t.matrix = gbdt::FeatureMatrix(0, kNumFeatures);
  t.feature_names = default_feature_names();
  for (const Sample& s : samples) {
    const auto row = extract_features(s, options).features.to_array();
    t.matrix.append_row(row);
    t.labels.push_back(s.label ? 1 : 0);
    t.sample_ids.push_back(s.sample_id);
  }
  return t;
}

void write_features_csv(const std::string& path, const FeatureTable& table) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out.precision(12);
  out << "sample_id,alpha_geo,alpha_sep,detection_quality,token_confidence,label\n";
  for (std::size_t r = 0; r < table.matrix.rows(); ++r) {
    out << table.sample_ids[r];
    for (double v : table.matrix.row(r)) out << ',' << v;
    out << ',' << (table.labels[r] ? "true" : "false") << '\n';
  }
}

ConfidenceSource confidence_source_from_string(const std::string& s) {
  if (s == "model") return ConfidenceSource::kModel;
  if (s == "oracle") return ConfidenceSource::kOracle;
  if (s == "token") return ConfidenceSource::kToken;
  if (s == "geometric") return ConfidenceSource::kGeometric;
  throw std::invalid_argument("unknown confidence source '" + s + "' (model|oracle|token|geometric)");
}

std::string to_string(ConfidenceSource s) {
  switch (s) {
    case ConfidenceSource::kModel: return "model";
    case ConfidenceSource::kOracle: return "oracle";
    case ConfidenceSource::kToken: return "token";
    case ConfidenceSource::kGeometric: return "geometric";
  }
  return "?";
}

std::vector<double> confidences_for(const FeatureTable& table, ConfidenceSource source,
                                    const gbdt::GbdtModel* model) {
  const std::size_t n = table.matrix.rows();
  std::vector<double> out(n);
  switch (source) {
    case ConfidenceSource::kModel:
      if (model == nullptr) throw std::invalid_argument("model confidences need a model");
      return model->predict_proba(table.matrix);
    case ConfidenceSource::kOracle:
      for (std::size_t i = 0; i < n; ++i) out[i] = table.labels[i] ? 1.0 : 0.0;
      break;
    case ConfidenceSource::kToken:
      for (std::size_t i = 0; i < n; ++i) out[i] = table.matrix(i, 3);
      break;
    case ConfidenceSource::kGeometric:
      for (std::size_t i = 0; i < n; ++i) out[i] = table.matrix(i, 0);
      break;
  }
  return out;
}

TrainOutcome fit_model(const FeatureTable& train, const FeatureTable* validation, const gbdt::TrainConfig& config) {
  const bool use_validation = validation != nullptr && validation->matrix.rows() > 0;
  const std::size_t n_train = train.matrix.rows();
  std::vector<double> train_logits(n_train, 0.0);
  std::vector<double> val_logits(use_validation ? validation->matrix.rows() : 0, 0.0);

  TrainOutcome out;
  auto on_tree = [&](int index, const gbdt::Tree& tree) {
    for (std::size_t i = 0; i < n_train; ++i) train_logits[i] += config.learning_rate * tree.leaf_weight(train.matrix.row(i));
    TrainOutcome::LogRow row{index + 1, mean_logistic_loss(train_logits, train.labels), std::nullopt};
    if (use_validation) {
      for (std::size_t i = 0; i < val_logits.size(); ++i) {
        val_logits[i] += config.learning_rate * tree.leaf_weight(validation->matrix.row(i));
      }
      row.validation_loss = mean_logistic_loss(val_logits, validation->labels);
    }
    out.log.push_back(row);
  };

  out.model = gbdt::train(train.matrix, train.labels, config, on_tree);
  out.model.feature_names = train.feature_names.empty() ? default_feature_names() : train.feature_names;

  const std::vector<double> train_scores = out.model.predict_proba(train.matrix);
  out.train_auroc = eval::auroc(train_scores, train.labels);
  if (use_validation && has_both_classes(validation->labels)) {
    const std::vector<double> val_scores = out.model.predict_proba(validation->matrix);
    out.validation_auroc = eval::auroc(val_scores, validation->labels);
    out.model.decision_threshold = eval::youden_threshold(val_scores, validation->labels);
  } else {
    out.model.decision_threshold = eval::youden_threshold(train_scores, train.labels);
  }
  return out;
}

AblateMode ablate_mode_from_string(const std::string& s) {
  if (s == "drop") return AblateMode::kDrop;
  if (s == "mask") return AblateMode::kMask;
  throw std::invalid_argument("unknown ablate mode '" + s + "' (drop|mask)");
}

std::vector<AblationRow> run_ablation(const FeatureTable& train, const FeatureTable& test,
                                      const gbdt::TrainConfig& config, AblateMode mode, double target) {
  const std::size_t width = train.matrix.cols();
  if (test.matrix.cols() != width) throw std::invalid_argument("train and test feature widths differ");
  const std::vector<std::string> names = train.feature_names.empty() ? default_feature_names() : train.feature_names;

  auto score = [&](const gbdt::FeatureMatrix& tr, const gbdt::FeatureMatrix& te, std::string name) {
    const gbdt::GbdtModel model = gbdt::train(tr, train.labels, config);
    const std::vector<double> s = model.predict_proba(te);
    return AblationRow{std::move(name), eval::auroc(s, test.labels),
                       eval::coverage_at_accuracy(s, test.labels, target).coverage};
  };

  std::vector<AblationRow> rows;
  rows.push_back(score(train.matrix, test.matrix, "full"));
  for (std::size_t f = 0; f < width; ++f) {
    const std::string name = "without_" + names.at(f);
    if (mode == AblateMode::kDrop) {
      std::vector<std::size_t> keep;
      for (std::size_t c = 0; c < width; ++c) {
        if (c != f) keep.push_back(c);
      }
      rows.push_back(score(train.matrix.select_columns(keep), test.matrix.select_columns(keep), name));
    } else {
      double mean = 0.0;
      for (std::size_t r = 0; r < train.matrix.rows(); ++r) mean += train.matrix(r, f);
      mean /= static_cast<double>(std::max<std::size_t>(1, train.matrix.rows()));
      gbdt::FeatureMatrix tr = train.matrix;
      gbdt::FeatureMatrix te = test.matrix;
      for (std::size_t r = 0; r < tr.rows(); ++r) tr(r, f) = mean;
      for (std::size_t r = 0; r < te.rows(); ++r) te(r, f) = mean;
      rows.push_back(score(tr, te, name));
    }
  }
  // Geometric confidence used directly as the score, without fusion.
  const std::vector<double> geo = confidences_for(test, ConfidenceSource::kGeometric, nullptr);
  rows.push_back({"geometric_only", eval::auroc(geo, test.labels), eval::coverage_at_accuracy(geo, test.labels, target).coverage});
  return rows;
}

std::vector<double> parse_number_list(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad number '" + s + "' in list '" + text + "'");
    }
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument("bad number '" + s + "' in list '" + text + "'");
    return v;
  };

  std::vector<double> out;
  if (text.empty()) return out;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const auto colon = text.find(':', dots);
    if (colon == std::string::npos) throw std::invalid_argument("range '" + text + "' needs start..stop:step");
    const double start = number(text.substr(0, dots));
    const double stop = number(text.substr(dots + 2, colon - dots - 2));
    const double step = number(text.substr(colon + 1));
    if (!(step > 0.0) || stop < start) throw std::invalid_argument("range '" + text + "' is empty or has a bad step");
    for (std::size_t i = 0;; ++i) {
      const double v = trim(start + static_cast<double>(i) * step);
      if (v > stop + 1e-9) break;
      out.push_back(v);
    }
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(number(item));
  return out;
}

}  // namespace spatial_trust
