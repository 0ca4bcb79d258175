#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>

#include <spdlog/spdlog.h>

#include "spatial_trust/pipeline.hpp"
#include "spatial_trust/scenegraph.hpp"

namespace spatial_trust {

namespace fs = std::filesystem;

namespace {

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory '" + dir + "'");
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<Sample> load_samples(const std::string& path, const char* what) {
  if (path.empty()) throw std::invalid_argument(std::string("missing ") + what + " path (--data)");
  std::vector<Sample> samples = parse_dataset(path);
  spdlog::info("loaded {} samples from {}", samples.size(), path);
  return samples;
}

gbdt::GbdtModel load_checked_model(const std::string& path) {
  if (path.empty()) throw std::invalid_argument("missing model path (--model)");
  gbdt::GbdtModel model = gbdt::load_model(path);
  const std::vector<std::string> expected(kFeatureNames.begin(), kFeatureNames.end());
  if (model.n_features != kNumFeatures || model.feature_names != expected) {
    throw gbdt::ModelFormatError("model feature set does not match the 4-feature layout of this build");
  }
  return model;
}

// Model is needed for model-backed confidences; other sources use it only if given.
std::optional<gbdt::GbdtModel> model_for(const RunConfig& cfg) {
  if (cfg.confidence_source == ConfidenceSource::kModel || !cfg.model_path.empty()) {
    return load_checked_model(cfg.model_path);
  }
  return std::nullopt;
}

void write_training_log(const std::string& path, const TrainOutcome& outcome) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out.precision(12);
  out << "iteration,train_loss,validation_loss\n";
  for (const auto& row : outcome.log) {
    out << row.iteration << ',' << row.train_loss << ',';
    if (row.validation_loss) out << *row.validation_loss;
    out << '\n';
  }
}

}  // namespace

int cmd_gen(const RunConfig& cfg) {
  synth::SynthConfig sc = cfg.synth;
  sc.n_samples = cfg.n;
  sc.seed = cfg.seed;
  sc.validate();
  ensure_dir(cfg.out_dir);

  const synth::SynthDataset train = synth::generate(sc);
  write_dataset(join(cfg.out_dir, "train.jsonl"), train.samples);
  synth::write_truth(join(cfg.out_dir, "train.truth.jsonl"), train.truth);
  spdlog::info("wrote {} samples to {}", train.samples.size(), join(cfg.out_dir, "train.jsonl"));

  if (cfg.n_test > 0) {
    synth::SynthConfig tc = sc;
    tc.n_samples = cfg.n_test;
    tc.seed = cfg.seed ^ 0x5deece66dULL;  // independent stream for held-out data
    const synth::SynthDataset test = synth::generate(tc);
    write_dataset(join(cfg.out_dir, "test.jsonl"), test.samples);
    synth::write_truth(join(cfg.out_dir, "test.truth.jsonl"), test.truth);
    spdlog::info("wrote {} samples to {}", test.samples.size(), join(cfg.out_dir, "test.jsonl"));
  }
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  const std::vector<Sample> samples = load_samples(cfg.data_path, "training data");
  SplitSpec split = cfg.split;
  split.seed = cfg.seed;
  const Partitions parts = split_dataset(samples, split);
  spdlog::info("split: {} train, {} validation, {} unused", parts.train.size(), parts.validation.size(),
               parts.test.size());
  const FeatureTable train = build_feature_table(parts.train, cfg.geometry);
  const FeatureTable validation = build_feature_table(parts.validation, cfg.geometry);

  gbdt::TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  const TrainOutcome outcome = fit_model(train, &validation, tc);

  ensure_dir(cfg.out_dir);
  gbdt::save_model(outcome.model, join(cfg.out_dir, "model.json"));
  write_training_log(join(cfg.out_dir, "train_log.csv"), outcome);

  std::ofstream imp(join(cfg.out_dir, "feature_importance.csv"), std::ios::binary | std::ios::trunc);
  imp.precision(12);
  imp << "feature,importance\n";
  const std::vector<double> shares = gbdt::feature_importance(outcome.model);
  for (std::size_t f = 0; f < shares.size(); ++f) imp << outcome.model.feature_names[f] << ',' << shares[f] << '\n';

  spdlog::info("train AUROC {:.4f}", outcome.train_auroc);
  if (outcome.validation_auroc) spdlog::info("validation AUROC {:.4f}", *outcome.validation_auroc);
  spdlog::info("decision threshold {:.4f}", outcome.model.decision_threshold.value_or(0.5));
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  const std::optional<gbdt::GbdtModel> model = model_for(cfg);
  const std::vector<Sample> samples = load_samples(cfg.data_path, "evaluation data");
  const FeatureTable table = build_feature_table(samples, cfg.geometry);
  const std::vector<double> scores = confidences_for(table, cfg.confidence_source, model ? &*model : nullptr);

  double threshold = 0.5;
  if (cfg.confidence_source == ConfidenceSource::kModel && model->decision_threshold) {
    threshold = *model->decision_threshold;
  } else if (cfg.confidence_source != ConfidenceSource::kModel) {
    // Baseline scores have no held-out threshold; pick one in-sample.
    threshold = eval::youden_threshold(scores, table.labels);
  }

  const eval::EvalReport report = eval::build_report(scores, table.labels, threshold, cfg.targets);
  nlohmann::ordered_json j = eval::report_to_json(report);
  j["confidence_source"] = to_string(cfg.confidence_source);
  if (cfg.timestamp) j["generated_at"] = utc_timestamp();

  ensure_dir(cfg.out_dir);
  write_json(join(cfg.out_dir, "report.json"), j);
  eval::write_roc_csv(join(cfg.out_dir, "roc.csv"), report.roc);
  eval::write_coverage_csv(join(cfg.out_dir, "coverage.csv"), report.coverage_curve);
  if (!cfg.features_csv.empty()) write_features_csv(cfg.features_csv, table);

  spdlog::info("AUROC {:.4f}  precision {:.4f}  recall {:.4f}  Cov@60% {:.4f}", report.auroc, report.precision,
               report.recall, report.coverage_at_60.coverage);
  return 0;
}

int cmd_scenegraph(const RunConfig& cfg) {
  const std::optional<gbdt::GbdtModel> model = model_for(cfg);
  const std::vector<Sample> samples = load_samples(cfg.data_path, "scene-graph data");
  const FeatureTable table = build_feature_table(samples, cfg.geometry);
  const std::vector<double> conf = confidences_for(table, cfg.confidence_source, model ? &*model : nullptr);

  const std::vector<double> taus = cfg.taus.empty() ? parse_number_list("0.0..1.0:0.05") : cfg.taus;
  const double tau = cfg.graph_tau.value_or(model && model->decision_threshold ? *model->decision_threshold : 0.5);

  ensure_dir(cfg.out_dir);
  write_json(join(cfg.out_dir, "graphs.json"), graph::graphs_to_json(graph::build_graphs(samples, conf, tau)));
  const std::vector<graph::GraphMetrics> sweep =
      samples.empty() ? std::vector<graph::GraphMetrics>{} : graph::sweep_tau(samples, conf, taus);
  graph::write_sweep_csv(join(cfg.out_dir, "graph_sweep.csv"), sweep);
  graph::write_targets_csv(join(cfg.out_dir, "graph_targets.csv"), graph::sweep_targets(samples, conf, cfg.targets));
  spdlog::info("scene graphs written at tau {:.4f}", tau);
  return 0;
}

int cmd_ablate(const RunConfig& cfg) {
  const std::vector<Sample> samples = load_samples(cfg.data_path, "training data");
  std::vector<Sample> train_samples;
  std::vector<Sample> test_samples;
  if (!cfg.test_path.empty()) {
    train_samples = samples;
    test_samples = parse_dataset(cfg.test_path);
  } else {
    SplitSpec split = cfg.split;
    split.seed = cfg.seed;
    Partitions parts = split_dataset(samples, split);
    train_samples = std::move(parts.train);
    test_samples = std::move(parts.validation);
  }
  const FeatureTable train = build_feature_table(train_samples, cfg.geometry);
  const FeatureTable test = build_feature_table(test_samples, cfg.geometry);
  const std::vector<AblationRow> rows = run_ablation(train, test, cfg.train, cfg.ablate_mode, cfg.ablation_target);

  ensure_dir(cfg.out_dir);
  std::ofstream out(join(cfg.out_dir, "ablation.csv"), std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write ablation.csv");
  out.precision(12);
  out << "configuration,auroc,coverage,target\n";
  for (const AblationRow& r : rows) {
    out << r.configuration << ',' << r.auroc << ',' << r.coverage << ',' << cfg.ablation_target << '\n';
    spdlog::info("{:<28} AUROC {:.4f}  coverage {:.4f}", r.configuration, r.auroc, r.coverage);
  }
  return 0;
}

}  // namespace spatial_trust
