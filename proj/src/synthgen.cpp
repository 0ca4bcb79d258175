#include "spatial_trust/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <random>

#include "spatial_trust/geometry.hpp"

namespace spatial_trust::synth {

namespace {

constexpr std::array<const char*, 16> kObjectNames = {
    "person", "dog",    "cat",    "car",   "chair", "table",    "cup",   "bed",
    "suitcase", "toilet", "bottle", "laptop", "bench", "umbrella", "horse", "bicycle"};

struct ObjectInstance {
  std::string name;
  BoundingBox true_box;
  Detection detection;
};

std::string numbered(const char* prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

class SceneSampler {
 public:
  explicit SceneSampler(const SynthConfig& c) : c_(c), rng_(c.seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
  double normal(double mean, double sd) {
    if (sd <= 0.0) return mean;
    return std::normal_distribution<double>(mean, sd)(rng_);
  }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  std::mt19937_64& engine() { return rng_; }

  BoundingBox place_box() {
    const double w = uniform(c_.min_box_size, c_.max_box_size);
    const double h = uniform(c_.min_box_size, c_.max_box_size);
    const double x = uniform(0.0, c_.image_width - w);
    const double y = uniform(0.0, c_.image_height - h);
    return {x, y, x + w, y + h};
  }

  Detection detect(const std::string& name, const BoundingBox& truth) {
    Detection d;
    d.label = name;
    if (chance(c_.detection_failure_rate)) {
      d.score = uniform(0.0, kDetectionThreshold);
      return d;
    }
    d.score = std::clamp(normal(c_.detection_score_mean, c_.detection_score_spread), kDetectionThreshold, 1.0);
    const double dx = normal(0.0, c_.detector_noise_sigma);
    const double dy = normal(0.0, c_.detector_noise_sigma);
    const double x = std::clamp(truth.x_min + dx, 0.0, c_.image_width - truth.width());
    const double y = std::clamp(truth.y_min + dy, 0.0, c_.image_height - truth.height());
    d.box = BoundingBox{x, y, x + truth.width(), y + truth.height()};
    return d;
  }

  Relation other_relation(Relation r) {
    std::vector<Relation> others;
    for (Relation o : kAllRelations) {
      if (o != r) others.push_back(o);
    }
    return others[index(others.size())];
  }

 private:
  const SynthConfig& c_;
  std::mt19937_64 rng_;
};

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0,1]");
}

}  // namespace

void SynthConfig::validate() const {
  check_unit(detection_failure_rate, "detection_failure_rate");
  check_unit(detection_score_mean, "detection_score_mean");
  check_unit(vlm_base_error, "vlm_base_error");
  check_unit(vlm_overlap_error_boost, "vlm_overlap_error_boost");
  check_unit(vlm_small_displacement_error_boost, "vlm_small_displacement_error_boost");
  check_unit(overlap_iou_threshold, "overlap_iou_threshold");
  check_unit(token_mean_when_correct, "token_mean_when_correct");
  check_unit(token_mean_when_wrong, "token_mean_when_wrong");
  check_unit(false_claim_rate, "false_claim_rate");
  if (!(image_width > 0.0 && image_height > 0.0)) throw std::invalid_argument("image size must be positive");
  if (!(min_box_size > 0.0 && min_box_size <= max_box_size)) {
    throw std::invalid_argument("box sizes must satisfy 0 < min_box_size <= max_box_size");
  }
  if (max_box_size >= std::min(image_width, image_height)) {
    throw std::invalid_argument("max_box_size must be smaller than the image");
  }
  if (objects_per_image < 2 || objects_per_image > kObjectNames.size()) {
    throw std::invalid_argument("objects_per_image must lie in [2," + std::to_string(kObjectNames.size()) + "]");
  }
  if (pairs_per_image < 1 || pairs_per_image > objects_per_image * (objects_per_image - 1)) {
    throw std::invalid_argument("pairs_per_image must lie in [1, objects_per_image*(objects_per_image-1)]");
  }
  if (!(detector_noise_sigma >= 0.0)) throw std::invalid_argument("detector_noise_sigma must be >= 0");
  if (!(detection_score_spread >= 0.0 && token_spread >= 0.0)) throw std::invalid_argument("spreads must be >= 0");
  if (!(small_displacement_px >= 0.0)) throw std::invalid_argument("small_displacement_px must be >= 0");
}

SynthDataset generate(const SynthConfig& config) {
  config.validate();
  SceneSampler rng(config);
  SynthDataset out;
  out.samples.reserve(config.n_samples);
  out.truth.reserve(config.n_samples);

  std::vector<std::string> names(kObjectNames.begin(), kObjectNames.end());
  for (std::size_t image = 0; out.samples.size() < config.n_samples; ++image) {
    std::shuffle(names.begin(), names.end(), rng.engine());
    std::vector<ObjectInstance> objects;
    for (std::size_t k = 0; k < config.objects_per_image; ++k) {
      ObjectInstance obj{names[k], rng.place_box(), {}};
      obj.detection = rng.detect(obj.name, obj.true_box);
      objects.push_back(std::move(obj));
    }

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < objects.size(); ++a) {
      for (std::size_t b = 0; b < objects.size(); ++b) {
        if (a != b) pairs.emplace_back(a, b);
      }
    }
    std::shuffle(pairs.begin(), pairs.end(), rng.engine());
    pairs.resize(config.pairs_per_image);

    const std::string image_id = numbered("img", image, 6);
    for (const auto& [a, b] : pairs) {
      if (out.samples.size() == config.n_samples) break;
      const ObjectInstance& o1 = objects[a];
      const ObjectInstance& o2 = objects[b];
      const GeoOutcome geo = classify_relation(center(o1.true_box), center(o2.true_box));
      if (!geo.relation) continue;  // coincident centers carry no direction

      double p_err = config.vlm_base_error;
      if (iou(o1.true_box, o2.true_box) > config.overlap_iou_threshold) p_err += config.vlm_overlap_error_boost;
      if (geo.d_primary < config.small_displacement_px) p_err += config.vlm_small_displacement_error_boost;
      p_err = std::clamp(p_err, 0.0, 1.0);

      const Relation truth = *geo.relation;
      const bool wrong = rng.chance(p_err);
      const Relation predicted = wrong ? rng.other_relation(truth) : truth;
      const double token_mean = wrong ? config.token_mean_when_wrong : config.token_mean_when_correct;
      const double token = std::clamp(rng.normal(token_mean, config.token_spread), 0.0, 1.0);
      const Relation claimed = rng.chance(config.false_claim_rate) ? rng.other_relation(truth) : truth;

      Sample s;
      s.sample_id = numbered("s", out.samples.size(), 7);
      s.image_id = image_id;
      s.object_1 = o1.name;
      s.object_2 = o2.name;
      s.claimed_relation = claimed;
      s.prediction = {predicted, token};
      s.detection_1 = o1.detection;
      s.detection_2 = o2.detection;
      s.label = predicted == truth;
      s.image_width = config.image_width;
      s.image_height = config.image_height;

      out.truth.push_back({s.sample_id, truth, o1.true_box, o2.true_box, p_err, s.label});
      out.samples.push_back(std::move(s));
    }
  }
  return out;
}

nlohmann::ordered_json truth_to_json(const GroundTruth& t) {
  auto box = [](const BoundingBox& b) { return nlohmann::ordered_json::array({b.x_min, b.y_min, b.x_max, b.y_max}); };
  nlohmann::ordered_json j;
  j["sample_id"] = t.sample_id;
  j["true_relation"] = to_string(t.true_relation);
  j["true_box_1"] = box(t.true_box_1);
  j["true_box_2"] = box(t.true_box_2);
  j["vlm_error_probability"] = t.vlm_error_probability;
  j["vlm_correct"] = t.vlm_correct;
  return j;
}

void write_truth(const std::string& path, const std::vector<GroundTruth>& truth) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  for (const GroundTruth& t : truth) out << truth_to_json(t).dump() << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

#define SPATIAL_TRUST_SYNTH_FIELDS(X)                                                                \
  X(n_samples) X(image_width) X(image_height) X(objects_per_image) X(pairs_per_image) X(min_box_size) \
  X(max_box_size) X(detector_noise_sigma) X(detection_failure_rate) X(detection_score_mean)           \
  X(detection_score_spread) X(vlm_base_error) X(vlm_overlap_error_boost)                              \
  X(vlm_small_displacement_error_boost) X(overlap_iou_threshold) X(small_displacement_px)             \
  X(token_mean_when_correct) X(token_mean_when_wrong) X(token_spread) X(false_claim_rate) X(seed)

SynthConfig config_from_json(const nlohmann::json& j, SynthConfig base) {
#define X(field) \
  if (auto it = j.find(#field); it != j.end()) it->get_to(base.field);
  SPATIAL_TRUST_SYNTH_FIELDS(X)
#undef X
  return base;
}

nlohmann::ordered_json config_to_json(const SynthConfig& config) {
  nlohmann::ordered_json j;
#define X(field) j[#field] = config.field;
  SPATIAL_TRUST_SYNTH_FIELDS(X)
#undef X
  return j;
}

#undef SPATIAL_TRUST_SYNTH_FIELDS

}  // namespace spatial_trust::synth
