// spatial-trust: generate, train, evaluate, build scene graphs and run ablations.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "spatial_trust/pipeline.hpp"

namespace {

using spatial_trust::RunConfig;

std::string config_scalar(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  if (v.is_array()) {
    std::string joined;
    for (const auto& e : v) {
      if (!e.is_number()) throw std::invalid_argument("config list '" + key + "' must hold numbers");
      joined += (joined.empty() ? "" : ",") + e.dump();
    }
    return joined;
  }
  throw std::invalid_argument("config key '" + key + "' must be a scalar or a list of numbers");
}

// Fills options of `sub` from a flat JSON object. Keys use underscores where
// flags use dashes; anything already given on the command line wins, and keys
// that name no option of this subcommand are ignored.
void apply_config_file(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config file '" + path + "' must hold a flat JSON object");
  for (const auto& [key, value] : j.items()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    CLI::Option* opt = sub->get_option_no_throw(flag);
    if (opt == nullptr || opt->count() > 0 || flag == "--config") continue;
    opt->add_result(config_scalar(value, key));
    try {
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw std::invalid_argument("config key '" + key + "': " + e.what());
    }
  }
}

struct ListOptions {
  std::string targets = "0.5,0.6,0.7,0.8";
  std::string taus = "0.0..1.0:0.05";
  std::string confidence_source = "model";
  std::string ablate_mode = "drop";
  double graph_tau = -1.0;
  bool no_timestamp = false;
  bool raw_alpha_geo = false;
};

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help, RunConfig& cfg) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->add_option("--config", cfg.config_path, "JSON file with flat keys; flags override it");
  sub->add_option("--seed", cfg.seed, "Seed for generation and splitting")->capture_default_str();
  sub->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
  return sub;
}

void add_geometry_options(CLI::App* sub, RunConfig& cfg, ListOptions& lists) {
  sub->add_option("--near-kappa", cfg.geometry.near_kappa, "Near radius as a multiple of the mean box diagonal")
      ->capture_default_str();
  sub->add_flag("--normalize-geometry", cfg.geometry.normalize_by_image_width,
                "Ramp displacements over 0.1 * image_width instead of 100 px");
  sub->add_flag("--raw-alpha-geo", lists.raw_alpha_geo, "Use alignment without the detection-quality adjustment");
}

void add_train_options(CLI::App* sub, RunConfig& cfg) {
  auto& t = cfg.train;
  sub->add_option("--n-trees", t.n_trees)->capture_default_str();
  sub->add_option("--learning-rate", t.learning_rate)->capture_default_str();
  sub->add_option("--max-depth", t.max_depth)->capture_default_str();
  sub->add_option("--l1-alpha", t.l1_alpha)->capture_default_str();
  sub->add_option("--l2-lambda", t.l2_lambda)->capture_default_str();
  sub->add_option("--min-samples-leaf", t.min_samples_leaf)->capture_default_str();
  sub->add_option("--train-fraction", cfg.split.train_fraction)->capture_default_str();
  sub->add_option("--validation-fraction", cfg.split.validation_fraction)->capture_default_str();
}

void add_synth_options(CLI::App* sub, RunConfig& cfg) {
  auto& s = cfg.synth;
  sub->add_option("--image-width", s.image_width)->capture_default_str();
  sub->add_option("--image-height", s.image_height)->capture_default_str();
  sub->add_option("--objects-per-image", s.objects_per_image)->capture_default_str();
  sub->add_option("--pairs-per-image", s.pairs_per_image)->capture_default_str();
  sub->add_option("--min-box-size", s.min_box_size)->capture_default_str();
  sub->add_option("--max-box-size", s.max_box_size)->capture_default_str();
  sub->add_option("--detector-noise-sigma", s.detector_noise_sigma)->capture_default_str();
  sub->add_option("--detection-failure-rate", s.detection_failure_rate)->capture_default_str();
  sub->add_option("--detection-score-mean", s.detection_score_mean)->capture_default_str();
  sub->add_option("--detection-score-spread", s.detection_score_spread)->capture_default_str();
  sub->add_option("--vlm-base-error", s.vlm_base_error)->capture_default_str();
  sub->add_option("--vlm-overlap-error-boost", s.vlm_overlap_error_boost)->capture_default_str();
  sub->add_option("--vlm-small-displacement-error-boost", s.vlm_small_displacement_error_boost)
      ->capture_default_str();
  sub->add_option("--overlap-iou-threshold", s.overlap_iou_threshold)->capture_default_str();
  sub->add_option("--small-displacement-px", s.small_displacement_px)->capture_default_str();
  sub->add_option("--token-mean-when-correct", s.token_mean_when_correct)->capture_default_str();
  sub->add_option("--token-mean-when-wrong", s.token_mean_when_wrong)->capture_default_str();
  sub->add_option("--token-spread", s.token_spread)->capture_default_str();
  sub->add_option("--false-claim-rate", s.false_claim_rate)->capture_default_str();
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("spatial-trust");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("SPATIAL_TRUST_LOG")) spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  RunConfig cfg;
  ListOptions lists;
  CLI::App app{"Vision-based confidence estimation for VLM spatial predictions"};
  app.require_subcommand(1);

  CLI::App* gen = add_command(app, "gen", "Generate a synthetic dataset with ground truth", cfg);
  gen->add_option("--n", cfg.n, "Number of training samples")->capture_default_str();
  gen->add_option("--n-test", cfg.n_test, "Number of held-out samples (test.jsonl)")->capture_default_str();
  add_synth_options(gen, cfg);

  CLI::App* train = add_command(app, "train", "Train the fusion model", cfg);
  train->add_option("--data", cfg.data_path, "Training JSONL");
  add_train_options(train, cfg);
  add_geometry_options(train, cfg, lists);

  CLI::App* eval = add_command(app, "eval", "Evaluate confidences on a dataset", cfg);
  eval->add_option("--model", cfg.model_path, "Model JSON");
  eval->add_option("--data", cfg.data_path, "Evaluation JSONL");
  eval->add_option("--targets", lists.targets, "Accuracy targets, list or start..stop:step")->capture_default_str();
  eval->add_option("--confidence-source", lists.confidence_source, "model|oracle|token|geometric")
      ->capture_default_str();
  eval->add_option("--features-csv", cfg.features_csv, "Also dump per-sample features here");
  eval->add_flag("--no-timestamp", lists.no_timestamp, "Omit generated_at from report.json");
  add_geometry_options(eval, cfg, lists);

  CLI::App* scene = add_command(app, "scenegraph", "Build scene graphs and sweep the edge threshold", cfg);
  scene->add_option("--model", cfg.model_path, "Model JSON");
  scene->add_option("--data", cfg.data_path, "Dataset JSONL");
  scene->add_option("--taus", lists.taus, "Edge thresholds, list or start..stop:step")->capture_default_str();
  scene->add_option("--targets", lists.targets, "Accuracy targets for the target-mode table")->capture_default_str();
  scene->add_option("--tau", lists.graph_tau, "Threshold for graphs.json (default: model decision threshold)");
  scene->add_option("--confidence-source", lists.confidence_source, "model|oracle|token|geometric")
      ->capture_default_str();
  add_geometry_options(scene, cfg, lists);

  CLI::App* ablate = add_command(app, "ablate", "Retrain with each feature removed", cfg);
  ablate->add_option("--data", cfg.data_path, "Training JSONL");
  ablate->add_option("--test", cfg.test_path, "Held-out JSONL (default: validation split of --data)");
  ablate->add_option("--ablate-mode", lists.ablate_mode, "drop|mask")->capture_default_str();
  ablate->add_option("--target", cfg.ablation_target, "Accuracy target for the coverage column")
      ->capture_default_str();
  add_train_options(ablate, cfg);
  add_geometry_options(ablate, cfg, lists);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    for (CLI::App* sub : app.get_subcommands()) {
      if (!cfg.config_path.empty()) apply_config_file(sub, cfg.config_path);
    }
    cfg.targets = spatial_trust::parse_number_list(lists.targets);
    cfg.taus = spatial_trust::parse_number_list(lists.taus);
    cfg.confidence_source = spatial_trust::confidence_source_from_string(lists.confidence_source);
    cfg.ablate_mode = spatial_trust::ablate_mode_from_string(lists.ablate_mode);
    cfg.timestamp = !lists.no_timestamp;
    cfg.geometry.adjust_for_detection_quality = !lists.raw_alpha_geo;
    if (lists.graph_tau >= 0.0) cfg.graph_tau = lists.graph_tau;

    if (gen->parsed()) return spatial_trust::cmd_gen(cfg);
    if (train->parsed()) return spatial_trust::cmd_train(cfg);
    if (eval->parsed()) return spatial_trust::cmd_eval(cfg);
    if (scene->parsed()) return spatial_trust::cmd_scenegraph(cfg);
    if (ablate->parsed()) return spatial_trust::cmd_ablate(cfg);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 1;
}
