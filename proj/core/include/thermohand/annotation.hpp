#pragma once

#include <string>

#include "thermohand/types.hpp"

namespace thermohand {

/// Keypoint annotation record. The same schema is written for synthetic
/// ground truth and for predictions:
///   {"gesture": int, "handedness": "left"|"right",
///    "fingertips": {"thumb": [x,y]|null, ..., "little": [x,y]|null},
///    "wrists": [[x,y],[x,y]]}
struct Annotation {
  GestureClass gesture;
  Handedness handedness = Handedness::Right;
  KeypointSet keypoints;
};

std::string annotation_to_json(const Annotation& a);
Annotation annotation_from_json(const std::string& text);

void write_annotation(const std::string& path, const Annotation& a);
Annotation read_annotation(const std::string& path);

}  // namespace thermohand
