#include "thermohand/types.hpp"

#include <algorithm>

#include "thermohand/vocabulary.hpp"

namespace thermohand {

namespace {

struct BBox {
  int min_x, min_y, max_x, max_y;
  bool contains(const Point2& p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
};

std::optional<BBox> foreground_bbox(const BinaryImage& img) {
  BBox b{img.width, img.height, -1, -1};
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      if (img.at(x, y)) {
        b.min_x = std::min(b.min_x, x);
        b.min_y = std::min(b.min_y, y);
        b.max_x = std::max(b.max_x, x);
        b.max_y = std::max(b.max_y, y);
      }
  if (b.max_x < 0) return std::nullopt;
  return b;
}

}  // namespace

std::vector<std::string> validate_sample(const Sample& s, const GestureVocabulary& vocab) {
  std::vector<std::string> issues;
  const auto& kp = s.keypoints;

  if (s.image.width != kp.width || s.image.height != kp.height)
    issues.push_back("image resolution does not match keypoint resolution");

  bool binary = true;
  for (auto v : s.image.data)
    if (v > 1) binary = false;
  if (!binary) issues.push_back("non-binary pixel (image values must be 0 or 1)");

  const FingerMask& mask = vocab.mask(s.gesture);
  for (int f = 0; f < kNumFingers; ++f) {
    if (kp.fingertips[f].has_value() != mask[f]) {
      issues.push_back(std::string("visibility mismatch: ") + finger_name(f) +
                       (mask[f] ? " hidden but required visible" : " present but mask hides it"));
    }
  }

  auto check_bounds = [&](const Point2& p, const std::string& what) {
    if (!p.finite()) {
      issues.push_back(what + " is not finite");
      return;
    }
    if (p.x < 0 || p.x >= kp.width || p.y < 0 || p.y >= kp.height)
      issues.push_back(what + " out of bounds");
  };
  for (int f = 0; f < kNumFingers; ++f)
    if (kp.fingertips[f]) check_bounds(*kp.fingertips[f], finger_name(f));
  check_bounds(kp.wrists[0], "wrist 0");
  check_bounds(kp.wrists[1], "wrist 1");

  if (kp.wrists[0] == kp.wrists[1]) issues.push_back("wrist points are not distinct");

  // Keypoints must sit on or within the foreground bounding box.
  if (auto bbox = foreground_bbox(s.image)) {
    auto check_bbox = [&](const Point2& p, const std::string& what) {
      if (p.finite() && !bbox->contains(p))
        issues.push_back(what + " outside foreground bounding box");
    };
    for (int f = 0; f < kNumFingers; ++f)
      if (kp.fingertips[f]) check_bbox(*kp.fingertips[f], finger_name(f));
    check_bbox(kp.wrists[0], "wrist 0");
    check_bbox(kp.wrists[1], "wrist 1");
  } else {
    issues.push_back("image has no foreground");
  }

  return issues;
}

}  // namespace thermohand
