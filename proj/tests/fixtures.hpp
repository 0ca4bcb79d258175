#pragma once

#include <string>

#include "spatial_trust/records.hpp"

namespace fixture {

// Two detected objects side by side, VLM says "left" with confidence 0.8.
inline spatial_trust::Sample sample(const std::string& id = "s1") {
  using namespace spatial_trust;
  Sample s;
  s.sample_id = id;
  s.image_id = "img1";
  s.object_1 = "cup";
  s.object_2 = "plate";
  s.claimed_relation = Relation::kLeft;
  s.prediction = {Relation::kLeft, 0.8};
  s.detection_1 = {"cup", BoundingBox{0, 0, 20, 20}, 0.9};
  s.detection_2 = {"plate", BoundingBox{100, 0, 120, 20}, 0.9};
  s.label = true;
  return s;
}

inline std::string line(const std::string& id = "s1") { return spatial_trust::sample_to_json(sample(id)).dump(); }

}  // namespace fixture
