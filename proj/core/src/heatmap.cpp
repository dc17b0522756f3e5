#include "thermohand/heatmap.hpp"

#include <algorithm>
#include <cmath>

#include "thermohand/image_io.hpp"

namespace thermohand {

int to_heatmap_pixel(double input_coord, double scale_factor) {
  // Round half down: ceil(t - 0.5). Integer inputs map to floor(coord/2),
  // keeping the to_input_coords round trip within 0.5 px per axis.
  return static_cast<int>(std::ceil(input_coord * scale_factor - 0.5));
}

Point2 to_input_coords(const Point2& heatmap_pt, int map_size) {
  if (heatmap_pt.x < 0 || heatmap_pt.x >= map_size || heatmap_pt.y < 0 ||
      heatmap_pt.y >= map_size)
    throw CodecError("heatmap point out of bounds");
  return {2.0 * heatmap_pt.x + 0.5, 2.0 * heatmap_pt.y + 0.5};
}

namespace {

// Stamps a truncated unnormalized Gaussian centered at integer pixel (cx, cy),
// combining with existing content by pixelwise max.
void stamp_gaussian(HeatmapStack& stack, int ch, int cx, int cy, const HeatmapConfig& cfg) {
  const double sigma = std::sqrt(cfg.gaussian_variance);
  const double radius = cfg.truncate_sigmas * sigma;
  const int r = static_cast<int>(std::floor(radius));
  const double r2 = radius * radius;
  const int x0 = std::max(0, cx - r), x1 = std::min(stack.size - 1, cx + r);
  const int y0 = std::max(0, cy - r), y1 = std::min(stack.size - 1, cy + r);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double d2 = static_cast<double>(x - cx) * (x - cx) +
                        static_cast<double>(y - cy) * (y - cy);
      if (d2 > r2) continue;
      const float v =
          static_cast<float>(cfg.peak_amplitude * std::exp(-d2 / (2.0 * cfg.gaussian_variance)));
      float& cell = stack.at(ch, x, y);
      cell = std::max(cell, v);
    }
  }
}

// Row-major argmax: smallest y, then smallest x wins ties.
struct Peak {
  int x = 0, y = 0;
  float value = 0.0f;
};

Peak channel_argmax(const HeatmapStack& stack, int ch) {
  Peak best{0, 0, stack.at(ch, 0, 0)};
  for (int y = 0; y < stack.size; ++y)
    for (int x = 0; x < stack.size; ++x)
      if (stack.at(ch, x, y) > best.value) best = {x, y, stack.at(ch, x, y)};
  return best;
}

}  // namespace

HeatmapStack encode_keypoints(const KeypointSet& kp, const FingerMask& mask,
                              const HeatmapConfig& cfg) {
  for (int f = 0; f < kNumFingers; ++f)
    if (kp.fingertips[f].has_value() != mask[f])
      throw CodecError(std::string("mask/keypoint mismatch at ") + finger_name(f));

  HeatmapStack stack(cfg.map_size, cfg.channels);
  for (int f = 0; f < kNumFingers; ++f) {
    if (!mask[f]) continue;  // hidden finger: channel stays all-zero
    const Point2& p = *kp.fingertips[f];
    stamp_gaussian(stack, f, to_heatmap_pixel(p.x, cfg.scale_factor),
                   to_heatmap_pixel(p.y, cfg.scale_factor), cfg);
  }
  for (const Point2& w : kp.wrists)
    stamp_gaussian(stack, cfg.channels - 1, to_heatmap_pixel(w.x, cfg.scale_factor),
                   to_heatmap_pixel(w.y, cfg.scale_factor), cfg);
  return stack;
}

std::vector<FingertipDetection> decode_fingertips(const HeatmapStack& stack,
                                                  const FingerMask& mask) {
  std::vector<FingertipDetection> out;
  for (int f = 0; f < kNumFingers; ++f) {
    if (!mask[f]) continue;
    Peak p = channel_argmax(stack, f);
    out.push_back({f, {static_cast<double>(p.x), static_cast<double>(p.y)}, p.value});
  }
  return out;
}

std::vector<FingertipDetection> decode_fingertips_threshold(const HeatmapStack& stack, double p) {
  if (!(p > 0.0 && p < 1.0)) throw CodecError("threshold p must be in (0,1)");
  std::vector<FingertipDetection> out;
  for (int f = 0; f < kNumFingers; ++f) {
    Peak peak = channel_argmax(stack, f);
    if (peak.value >= p)
      out.push_back({f, {static_cast<double>(peak.x), static_cast<double>(peak.y)}, peak.value});
  }
  return out;
}

std::pair<Point2, Point2> decode_wrists(const HeatmapStack& stack, const DecodeConfig& cfg) {
  const int ch = stack.channels - 1;
  Peak first = channel_argmax(stack, ch);
  if (first.value <= 0.0f) throw CodecError("wrist channel is empty");

  const double d2_min = cfg.wrist_min_separation * cfg.wrist_min_separation;
  Peak second{0, 0, 0.0f};
  bool found = false;
  for (int y = 0; y < stack.size; ++y) {
    for (int x = 0; x < stack.size; ++x) {
      const double d2 = static_cast<double>(x - first.x) * (x - first.x) +
                        static_cast<double>(y - first.y) * (y - first.y);
      if (d2 <= d2_min) continue;
      const float v = stack.at(ch, x, y);
      if (v > 0.0f && (!found || v > second.value)) {
        second = {x, y, v};
        found = true;
      }
    }
  }
  if (!found)
    throw CodecError("no second wrist: no positive pixel beyond d_th of the first peak");
  return {{static_cast<double>(first.x), static_cast<double>(first.y)},
          {static_cast<double>(second.x), static_cast<double>(second.y)}};
}

std::vector<std::string> dump_heatmap_pngs(const HeatmapStack& stack, const std::string& dir,
                                           const std::string& sample_id) {
  std::vector<std::string> paths;
  for (int ch = 0; ch < stack.channels; ++ch) {
    Grid<std::uint8_t> img(stack.size, stack.size);
    for (int y = 0; y < stack.size; ++y)
      for (int x = 0; x < stack.size; ++x) {
        const float v = std::clamp(stack.at(ch, x, y), 0.0f, 1.0f);
        img.at(x, y) = static_cast<std::uint8_t>(std::lround(v * 255.0f));
      }
    std::string path = dir + "/" + sample_id + "_ch" + std::to_string(ch + 1) + ".png";
    write_gray8_png(path, img);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace thermohand
