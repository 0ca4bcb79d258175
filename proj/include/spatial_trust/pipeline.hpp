#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spatial_trust/evalkit.hpp"
#include "spatial_trust/gbdt.hpp"
#include "spatial_trust/geometry.hpp"
#include "spatial_trust/records.hpp"
#include "spatial_trust/synthgen.hpp"

namespace spatial_trust {

// Features for a dataset, row-aligned with the input samples.
struct FeatureTable {
  gbdt::FeatureMatrix matrix;
  std::vector<std::uint8_t> labels;
  std::vector<std::string> sample_ids;
  std::vector<std::string> feature_names;
};

FeatureTable build_feature_table(const std::vector<Sample>& samples, const GeometryOptions& options = {});
void write_features_csv(const std::string& path, const FeatureTable& table);

// Where eval/scenegraph take per-sample confidences from.
enum class ConfidenceSource { kModel, kOracle, kToken, kGeometric };
ConfidenceSource confidence_source_from_string(const std::string& s);
std::string to_string(ConfidenceSource s);

std::vector<double> confidences_for(const FeatureTable& table, ConfidenceSource source,
                                    const gbdt::GbdtModel* model);

struct TrainOutcome {
  gbdt::GbdtModel model;
  double train_auroc = 0.0;
  std::optional<double> validation_auroc;
  struct LogRow {
    int iteration;
    double train_loss;
    std::optional<double> validation_loss;
  };
  std::vector<LogRow> log;
};

// Fits on the train partition, picks the Youden threshold on validation
// (falls back to training data when validation is empty or single-class).
TrainOutcome fit_model(const FeatureTable& train, const FeatureTable* validation, const gbdt::TrainConfig& config);

enum class AblateMode { kDrop, kMask };
AblateMode ablate_mode_from_string(const std::string& s);

struct AblationRow {
  std::string configuration;
  double auroc = 0.0;
  double coverage = 0.0;  // coverage at target accuracy
};

// Rows: full, without_<feature> for every feature, geometric_only.
std::vector<AblationRow> run_ablation(const FeatureTable& train, const FeatureTable& test,
                                      const gbdt::TrainConfig& config, AblateMode mode, double target);

// Everything the CLI subcommands need; flags and the JSON config fill it in.
struct RunConfig {
  std::string config_path;
  std::string out_dir = "out";
  std::string data_path;
  std::string test_path;
  std::string model_path;
  std::string features_csv;
  std::size_t n = 1000;
  std::size_t n_test = 0;
  std::uint64_t seed = 42;
  SplitSpec split;
  gbdt::TrainConfig train;
  synth::SynthConfig synth;
  GeometryOptions geometry;
  std::vector<double> targets = {0.5, 0.6, 0.7, 0.8};
  std::vector<double> taus;
  double ablation_target = 0.6;
  AblateMode ablate_mode = AblateMode::kDrop;
  ConfidenceSource confidence_source = ConfidenceSource::kModel;
  std::optional<double> graph_tau;  // defaults to the model's decision threshold
  bool timestamp = true;
};

// Parses "a,b,c" or "start..stop:step" (inclusive stop).
std::vector<double> parse_number_list(const std::string& text);

// Each command returns 0 on success and throws on any failure.
int cmd_gen(const RunConfig& cfg);
int cmd_train(const RunConfig& cfg);
int cmd_eval(const RunConfig& cfg);
int cmd_scenegraph(const RunConfig& cfg);
int cmd_ablate(const RunConfig& cfg);

}  // namespace spatial_trust
