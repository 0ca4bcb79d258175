#include "spatial_trust/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spatial_trust {

Center center(const BoundingBox& box) {
  return {(box.x_min + box.x_max) / 2.0, (box.y_min + box.y_max) / 2.0};
}

GeoOutcome classify_relation(const Center& p1, const Center& p2) {
  GeoOutcome g;
  g.valid = true;
  g.delta_x = p2.x - p1.x;
  g.delta_y = p2.y - p1.y;
  g.center_distance = std::hypot(g.delta_x, g.delta_y);
  const double ax = std::abs(g.delta_x);
  const double ay = std::abs(g.delta_y);
  if (ax == 0.0 && ay == 0.0) return g;
  if (ax >= ay) {
    // o2 further right means o1 is left of o2
    g.relation = g.delta_x > 0.0 ? Relation::kLeft : Relation::kRight;
    g.d_primary = ax;
  } else {
    // y grows downward: o2 lower means o1 is above
    g.relation = g.delta_y > 0.0 ? Relation::kAbove : Relation::kBelow;
    g.d_primary = ay;
  }
  return g;
}

GeoOutcome validate_geometry(const BoundingBox& b1, const BoundingBox& b2, double near_kappa) {
  GeoOutcome g = classify_relation(center(b1), center(b2));
  const double diag1 = std::hypot(b1.width(), b1.height());
  const double diag2 = std::hypot(b2.width(), b2.height());
  g.near_radius = near_kappa * (diag1 + diag2) / 2.0;
  return g;
}

double alignment_score(Relation predicted, const GeoOutcome& geo, double ramp_extent) {
  if (!(ramp_extent > 0.0)) throw std::invalid_argument("ramp extent must be positive");
  double d = 0.0;
  if (predicted == Relation::kNear) {
    if (geo.center_distance > geo.near_radius) return kMismatchAlignment;
    d = std::max(0.0, geo.near_radius - geo.center_distance);
  } else {
    if (!geo.relation || *geo.relation != predicted) return kMismatchAlignment;
    d = geo.d_primary;
  }
  return 0.5 + 0.5 * std::min(1.0, d / ramp_extent);
}

double quality_multiplier(double mean_quality) {
  return 0.5 + 0.5 / (1.0 + std::exp(-10.0 * (mean_quality - kDetectionThreshold)));
}

double geometric_confidence(Relation predicted, const GeoOutcome& geo, double mean_quality, double ramp_extent) {
  if (!geo.valid) throw std::invalid_argument("geometric confidence needs both detections");
  return alignment_score(predicted, geo, ramp_extent) * quality_multiplier(mean_quality);
}

double iou(const BoundingBox& b1, const BoundingBox& b2) {
  const double iw = std::min(b1.x_max, b2.x_max) - std::max(b1.x_min, b2.x_min);
  const double ih = std::min(b1.y_max, b2.y_max) - std::max(b1.y_min, b2.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = b1.area() + b2.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double separation_confidence(const BoundingBox& b1, const BoundingBox& b2) { return 1.0 - iou(b1, b2); }

ExtractedFeatures extract_features(const Sample& sample, const GeometryOptions& options) {
  ExtractedFeatures out;
  FeatureVector& f = out.features;
  f.token_confidence = sample.prediction.token_confidence;
  f.detection_quality =
      (sample.detection_1.effective_score() + sample.detection_2.effective_score()) / 2.0;

  const auto& b1 = sample.detection_1.box;
  const auto& b2 = sample.detection_2.box;
  if (!b1 || !b2) return out;  // missing detection: geometric signals stay zero

  double ramp = kRampExtentPx;
  if (options.normalize_by_image_width) {
    if (!sample.image_width) {
      throw std::invalid_argument("sample '" + sample.sample_id + "' lacks image_width for normalized geometry");
    }
    ramp = kNormalizedRampFraction * *sample.image_width;
  }

  out.geo = validate_geometry(*b1, *b2, options.near_kappa);
  const double raw = alignment_score(sample.prediction.relation, out.geo, ramp);
  f.alpha_geo = options.adjust_for_detection_quality ? raw * quality_multiplier(f.detection_quality) : raw;
  f.alpha_sep = separation_confidence(*b1, *b2);
  return out;
}

}  // namespace spatial_trust
