#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

#include "thermohand/heatmap.hpp"
#include "thermohand/types.hpp"
#include "thermohand/vocabulary.hpp"

namespace thermohand {

class DegenerateGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raw decoded keypoints at heatmap scale, before misorder correction.
struct RawDetections {
  std::array<std::optional<std::pair<Point2, double>>, kNumFingers> fingertips;
  std::array<Point2, 2> wrists;
  GestureClass gesture;
  Handedness handedness = Handedness::Right;
  bool degenerate_warning = false;  // set when correction was skipped
};

/// Tolerance on the cross-product magnitude below which the fingertip
/// centroid counts as collinear with the wrist segment.
constexpr double kChiralityEpsilon = 1e-6;

/// Picks the thumb-side wrist via the chirality of (finger centroid - wrist
/// midpoint) against the wrist offset: for a right hand the origin is the
/// wrist w with cross(d, w - m) < 0, for a left hand the one with > 0.
/// Returns the index (0 or 1) into `wrists`. Throws DegenerateGeometry when
/// the centroid is collinear with the wrist segment within kChiralityEpsilon.
int select_origin_wrist(const std::array<Point2, 2>& wrists,
                        const std::vector<Point2>& fingertips, Handedness hand);

/// Unsigned angle in degrees, in [0, 180], between (other_wrist - origin) and
/// each (fingertip - origin). Throws DegenerateGeometry on zero-length vectors.
std::vector<double> finger_angles(const Point2& origin, const Point2& other_wrist,
                                  const std::vector<Point2>& fingertips);

/// Reassigns the detected fingertip points to finger indices by descending
/// wrist-line angle: the widest angle goes to the first visible finger in
/// anatomical order. The point multiset is unchanged, only labels move.
/// Idempotent. On degenerate geometry returns the input unchanged with
/// degenerate_warning set.
RawDetections correct_misorder(const RawDetections& raw, const GestureVocabulary& vocab);

struct RefineResult {
  GestureClass gesture;
  Handedness handedness = Handedness::Right;
  KeypointSet keypoints;  // input-resolution coordinates
  bool degenerate_warning = false;
};

/// Full gesture/handedness-aware keypoint extraction: argmax gesture (ties ->
/// lowest id), handedness_prob >= 0.5 -> Right, mask-filtered fingertip
/// decode, d_th wrist decode, misorder correction, and mapping to input
/// coordinates.
RefineResult refine(const HeatmapStack& stack, const std::array<double, kNumGestures>& gesture_probs,
                    double handedness_prob, const GestureVocabulary& vocab,
                    const HeatmapConfig& hm_cfg, const DecodeConfig& dec_cfg);

}  // namespace thermohand
