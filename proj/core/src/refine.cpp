#include "thermohand/refine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace thermohand {

int select_origin_wrist(const std::array<Point2, 2>& wrists,
                        const std::vector<Point2>& fingertips, Handedness hand) {
  if (fingertips.empty()) throw DegenerateGeometry("no fingertips for origin selection");

  Point2 centroid{0, 0};
  for (const Point2& t : fingertips) {
    centroid.x += t.x;
    centroid.y += t.y;
  }
  centroid.x /= fingertips.size();
  centroid.y /= fingertips.size();

  const Point2 mid{(wrists[0].x + wrists[1].x) / 2.0, (wrists[0].y + wrists[1].y) / 2.0};
  const Point2 d{centroid.x - mid.x, centroid.y - mid.y};
  const Point2 w0{wrists[0].x - mid.x, wrists[0].y - mid.y};

  const double c0 = cross(d, w0);  // cross(d, w1 - m) is exactly -c0
  if (std::abs(c0) <= kChiralityEpsilon)
    throw DegenerateGeometry("fingertip centroid collinear with the wrist segment");

  const bool want_negative = hand == Handedness::Right;
  return (c0 < 0.0) == want_negative ? 0 : 1;
}

std::vector<double> finger_angles(const Point2& origin, const Point2& other_wrist,
                                  const std::vector<Point2>& fingertips) {
  const Point2 wrist_line{other_wrist.x - origin.x, other_wrist.y - origin.y};
  const double wn = std::hypot(wrist_line.x, wrist_line.y);
  if (wn == 0.0) throw DegenerateGeometry("wrist line has zero length");

  std::vector<double> angles;
  angles.reserve(fingertips.size());
  for (const Point2& t : fingertips) {
    const Point2 v{t.x - origin.x, t.y - origin.y};
    const double vn = std::hypot(v.x, v.y);
    if (vn == 0.0) throw DegenerateGeometry("fingertip coincides with the origin wrist");
    const double c = std::clamp((wrist_line.x * v.x + wrist_line.y * v.y) / (wn * vn), -1.0, 1.0);
    angles.push_back(std::acos(c) * 180.0 / M_PI);
  }
  return angles;
}

RawDetections correct_misorder(const RawDetections& raw, const GestureVocabulary& vocab) {
  std::vector<int> visible_fingers;
  std::vector<Point2> points;
  std::vector<double> scores;
  for (int f = 0; f < kNumFingers; ++f) {
    if (raw.fingertips[f]) {
      visible_fingers.push_back(f);
      points.push_back(raw.fingertips[f]->first);
      scores.push_back(raw.fingertips[f]->second);
    }
  }
  const FingerMask& mask = vocab.mask(raw.gesture);
  for (int f = 0; f < kNumFingers; ++f)
    if (mask[f] != raw.fingertips[f].has_value())
      throw CodecError("raw detections disagree with the gesture mask");

  if (visible_fingers.size() < 2) return raw;  // a single point has one assignment

  std::vector<double> angles;
  try {
    const int origin = select_origin_wrist(raw.wrists, points, raw.handedness);
    angles = finger_angles(raw.wrists[origin], raw.wrists[1 - origin], points);
  } catch (const DegenerateGeometry&) {
    RawDetections out = raw;
    out.degenerate_warning = true;
    return out;
  }

  // Widest angle -> first visible finger in anatomical order. Stable on ties.
  std::vector<size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return angles[a] > angles[b]; });

  RawDetections out = raw;
  for (size_t i = 0; i < order.size(); ++i)
    out.fingertips[visible_fingers[i]] = {points[order[i]], scores[order[i]]};
  return out;
}

RefineResult refine(const HeatmapStack& stack, const std::array<double, kNumGestures>& gesture_probs,
                    double handedness_prob, const GestureVocabulary& vocab,
                    const HeatmapConfig& hm_cfg, const DecodeConfig& dec_cfg) {
  double sum = std::accumulate(gesture_probs.begin(), gesture_probs.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-5) throw CodecError("gesture probabilities do not sum to 1");
  if (handedness_prob < 0.0 || handedness_prob > 1.0)
    throw CodecError("handedness probability out of [0,1]");

  // Argmax with ties to the lowest class id; boundary 0.5 goes to Right.
  int best = 0;
  for (int g = 1; g < kNumGestures; ++g)
    if (gesture_probs[g] > gesture_probs[best]) best = g;
  const GestureClass gesture(best + 1);
  const Handedness hand = handedness_prob >= 0.5 ? Handedness::Right : Handedness::Left;

  RawDetections raw;
  raw.gesture = gesture;
  raw.handedness = hand;
  for (const FingertipDetection& det : decode_fingertips(stack, vocab.mask(gesture)))
    raw.fingertips[det.finger] = {det.pos, det.score};
  auto [w1, w2] = decode_wrists(stack, dec_cfg);
  raw.wrists = {w1, w2};

  const RawDetections corrected = correct_misorder(raw, vocab);

  RefineResult result;
  result.gesture = gesture;
  result.handedness = hand;
  result.degenerate_warning = corrected.degenerate_warning;
  result.keypoints.width = hm_cfg.map_size * 2;
  result.keypoints.height = hm_cfg.map_size * 2;
  for (int f = 0; f < kNumFingers; ++f)
    if (corrected.fingertips[f])
      result.keypoints.fingertips[f] =
          to_input_coords(corrected.fingertips[f]->first, hm_cfg.map_size);
  result.keypoints.wrists[0] = to_input_coords(corrected.wrists[0], hm_cfg.map_size);
  result.keypoints.wrists[1] = to_input_coords(corrected.wrists[1], hm_cfg.map_size);
  return result;
}

}  // namespace thermohand
