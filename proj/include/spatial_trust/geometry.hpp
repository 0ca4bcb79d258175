#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "spatial_trust/records.hpp"

namespace spatial_trust {

struct Center {
  double x = 0.0;
  double y = 0.0;
};

// Result of comparing two object centers.
struct GeoOutcome {
  std::optional<Relation> relation;  // never kNear; absent for coincident centers or invalid
  double delta_x = 0.0;              // p2.x - p1.x
  double delta_y = 0.0;              // p2.y - p1.y
  double d_primary = 0.0;            // |delta| along the dominant axis
  double center_distance = 0.0;
  double near_radius = 0.0;          // distance bound for a "near" claim; 0 if unknown
  bool valid = false;                // both detections present
};

inline constexpr std::size_t kNumFeatures = 4;
inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "alpha_geo", "alpha_sep", "detection_quality", "token_confidence"};

struct FeatureVector {
  double alpha_geo = 0.0;
  double alpha_sep = 0.0;
  double detection_quality = 0.0;
  double token_confidence = 0.0;

  std::array<double, kNumFeatures> to_array() const {
    return {alpha_geo, alpha_sep, detection_quality, token_confidence};
  }
  bool operator==(const FeatureVector&) const = default;
};

struct GeometryOptions {
  // "near" holds when center distance <= near_kappa * mean box diagonal.
  double near_kappa = 1.0;
  // Feed the detection-quality adjusted alignment into the feature vector.
  bool adjust_for_detection_quality = true;
  // Ramp over 0.1 * image_width instead of 100 px. Requires image_width.
  bool normalize_by_image_width = false;
};

inline constexpr double kRampExtentPx = 100.0;
inline constexpr double kNormalizedRampFraction = 0.1;
inline constexpr double kMismatchAlignment = 0.2;
inline constexpr double kDetectionThreshold = 0.3;

Center center(const BoundingBox& box);

// Dominant-axis relation of o1 with respect to o2. Ties |dx| == |dy| > 0
// resolve to the horizontal axis; coincident centers give no relation.
GeoOutcome classify_relation(const Center& p1, const Center& p2);

// classify_relation on box centers, plus the "near" radius.
GeoOutcome validate_geometry(const BoundingBox& b1, const BoundingBox& b2, double near_kappa = 1.0);

// Alignment before any detection-quality adjustment: 0.2 on mismatch,
// 0.5 + 0.5 * min(1, d / ramp_extent) on match.
double alignment_score(Relation predicted, const GeoOutcome& geo, double ramp_extent = kRampExtentPx);

// 0.5 + 0.5 * sigmoid(10 * (mean_quality - 0.3)); equals 0.75 at 0.3.
double quality_multiplier(double mean_quality);

// Adjusted geometric confidence. Throws std::invalid_argument if !geo.valid.
double geometric_confidence(Relation predicted, const GeoOutcome& geo, double mean_quality,
                            double ramp_extent = kRampExtentPx);

double iou(const BoundingBox& b1, const BoundingBox& b2);
double separation_confidence(const BoundingBox& b1, const BoundingBox& b2);

struct ExtractedFeatures {
  FeatureVector features;
  GeoOutcome geo;
};

ExtractedFeatures extract_features(const Sample& sample, const GeometryOptions& options = {});

}  // namespace spatial_trust
