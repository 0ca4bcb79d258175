#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spatial_trust/records.hpp"

namespace spatial_trust::synth {

struct SynthConfig {
  std::size_t n_samples = 1000;
  double image_width = 640.0;
  double image_height = 480.0;
  std::size_t objects_per_image = 4;
  std::size_t pairs_per_image = 3;
  double min_box_size = 30.0;
  double max_box_size = 200.0;

  double detector_noise_sigma = 5.0;  // center jitter, pixels
  double detection_failure_rate = 0.1;
  double detection_score_mean = 0.65;
  double detection_score_spread = 0.2;

  // P(VLM wrong) = base + overlap_boost * [IoU > 0.3] + small_displacement_boost * [d_primary < 30 px]
  double vlm_base_error = 0.2;
  double vlm_overlap_error_boost = 0.4;
  double vlm_small_displacement_error_boost = 0.3;
  double overlap_iou_threshold = 0.3;
  double small_displacement_px = 30.0;

  double token_mean_when_correct = 0.62;
  double token_mean_when_wrong = 0.55;
  double token_spread = 0.15;

  // Fraction of claims replaced by a different relation than the truth.
  double false_claim_rate = 0.0;

  std::uint64_t seed = 42;

  // Throws std::invalid_argument naming the first bad field.
  void validate() const;
};

struct GroundTruth {
  std::string sample_id;
  Relation true_relation = Relation::kLeft;
  BoundingBox true_box_1;
  BoundingBox true_box_2;
  double vlm_error_probability = 0.0;
  bool vlm_correct = false;
};

struct SynthDataset {
  std::vector<Sample> samples;
  std::vector<GroundTruth> truth;  // aligned with samples
};

SynthDataset generate(const SynthConfig& config);

nlohmann::ordered_json truth_to_json(const GroundTruth& t);
void write_truth(const std::string& path, const std::vector<GroundTruth>& truth);

SynthConfig config_from_json(const nlohmann::json& j, SynthConfig base = {});
nlohmann::ordered_json config_to_json(const SynthConfig& config);

}  // namespace spatial_trust::synth
