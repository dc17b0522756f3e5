#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermohand/grid.hpp"

namespace thermohand {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
  bool operator==(const Point2&) const = default;
};

inline double distance(const Point2& a, const Point2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// 2D cross product magnitude-with-sign: a.x*b.y - a.y*b.x.
/// In image coordinates (y down) a positive value means b is clockwise from a.
inline double cross(const Point2& a, const Point2& b) { return a.x * b.y - a.y * b.x; }

enum class Handedness : int { Left = 0, Right = 1 };

inline const char* to_string(Handedness h) { return h == Handedness::Left ? "left" : "right"; }

constexpr int kNumGestures = 10;
constexpr int kNumFingers = 5;
constexpr int kInputSize = 100;

/// Gesture class id, 1-based as in the dataset labels (G1..G10).
struct GestureClass {
  int id = 1;

  GestureClass() = default;
  explicit GestureClass(int gesture_id) : id(gesture_id) {
    if (id < 1 || id > kNumGestures)
      throw std::invalid_argument("gesture id must be in [1,10], got " + std::to_string(id));
  }
  /// 0-based index, e.g. for vectors of per-gesture values.
  int index() const { return id - 1; }
  bool operator==(const GestureClass&) const = default;
};

/// Anatomical finger order used for heatmap channels and keypoint slots.
enum Finger : int { kThumb = 0, kIndex = 1, kMiddle = 2, kRing = 3, kLittle = 4 };

inline const char* finger_name(int f) {
  static const char* names[kNumFingers] = {"thumb", "index", "middle", "ring", "little"};
  return names[f];
}

/// Five optional fingertips (anatomical order) plus the two mandatory wrist
/// points, all at the declared input resolution.
struct KeypointSet {
  std::array<std::optional<Point2>, kNumFingers> fingertips;
  std::array<Point2, 2> wrists;
  int width = kInputSize;
  int height = kInputSize;

  std::array<bool, kNumFingers> visibility() const {
    std::array<bool, kNumFingers> m{};
    for (int f = 0; f < kNumFingers; ++f) m[f] = fingertips[f].has_value();
    return m;
  }
  std::vector<Point2> visible_points() const {
    std::vector<Point2> pts;
    for (const auto& t : fingertips)
      if (t) pts.push_back(*t);
    return pts;
  }
};

struct SampleMeta {
  std::string id;
  int user = -1;
  std::uint64_t seed = 0;
  std::string note;  // augmentation record etc.
};

/// One 100x100 binary hand image with its labels and keypoint annotations.
struct Sample {
  BinaryImage image;
  GestureClass gesture;
  Handedness handedness = Handedness::Right;
  KeypointSet keypoints;
  SampleMeta meta;
};

class GestureVocabulary;

/// Checks all Sample invariants; returns a list of human-readable violations
/// (empty list means the sample is valid). Violations are reported, not thrown.
std::vector<std::string> validate_sample(const Sample& s, const GestureVocabulary& vocab);

}  // namespace thermohand
