#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermohand/types.hpp"
#include "thermohand/vocabulary.hpp"

namespace thermohand {

struct HeatmapConfig {
  int map_size = 50;              // heatmap is map_size x map_size
  int channels = 6;               // 5 fingertips + 1 wrist channel
  double gaussian_variance = 1.5; // pixels^2 at heatmap scale
  double peak_amplitude = 1.0;
  double scale_factor = 0.5;      // input -> heatmap coordinate scale
  double truncate_sigmas = 4.0;   // Gaussian support radius; exact 0 beyond it
};

struct DecodeConfig {
  double wrist_min_separation = 5.0;          // d_th, heatmap pixels
  std::optional<double> baseline_threshold;   // only the threshold decoder uses this
};

/// 50x50x6 real-valued maps. Channels 0-4 are the fingertips in anatomical
/// order, channel 5 holds both wrist points.
struct HeatmapStack {
  int size = 50;
  int channels = 6;
  std::vector<float> values;  // [channel][y][x]

  HeatmapStack() = default;
  HeatmapStack(int map_size, int n_channels)
      : size(map_size), channels(n_channels),
        values(static_cast<size_t>(map_size) * map_size * n_channels, 0.0f) {}

  float& at(int ch, int x, int y) {
    return values[(static_cast<size_t>(ch) * size + y) * size + x];
  }
  float at(int ch, int x, int y) const {
    return values[(static_cast<size_t>(ch) * size + y) * size + x];
  }
  const float* channel(int ch) const { return values.data() + static_cast<size_t>(ch) * size * size; }
  float* channel(int ch) { return values.data() + static_cast<size_t>(ch) * size * size; }
};

struct FingertipDetection {
  int finger = 0;      // anatomical index
  Point2 pos;          // heatmap-scale coordinates
  double score = 0.0;  // peak value
};

class CodecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maps an input-resolution coordinate to its heatmap pixel. Rounds to the
/// nearest pixel with exact halves going down, so integer input coordinates
/// land at floor(coord/2) and to_input_coords inverts within 0.5 px per axis.
int to_heatmap_pixel(double input_coord, double scale_factor = 0.5);

/// Center of the 2x2 input-pixel block covered by a heatmap pixel.
Point2 to_input_coords(const Point2& heatmap_pt, int map_size = 50);

/// Builds the ground-truth stack: one truncated Gaussian per visible finger
/// (hidden channels all-zero), wrist channel = pixelwise max of the two wrist
/// Gaussians. Throws CodecError if the mask disagrees with the keypoints.
HeatmapStack encode_keypoints(const KeypointSet& kp, const FingerMask& mask,
                              const HeatmapConfig& cfg);

/// Gesture-aware decode: argmax per visible channel, hidden channels skipped
/// regardless of content. Ties broken row-major (smallest y, then smallest x).
std::vector<FingertipDetection> decode_fingertips(const HeatmapStack& stack,
                                                  const FingerMask& mask);

/// Fixed-threshold baseline decode: per channel argmax if the peak is >= p,
/// otherwise no detection for that finger.
std::vector<FingertipDetection> decode_fingertips_threshold(const HeatmapStack& stack, double p);

/// First wrist = global argmax of the wrist channel; second = highest pixel
/// farther than d_th from the first. Throws CodecError when no positive pixel
/// lies beyond d_th (degenerate single-peak map).
std::pair<Point2, Point2> decode_wrists(const HeatmapStack& stack, const DecodeConfig& cfg);

/// Writes one grayscale PNG per channel ([0,1] mapped to [0,255]) named
/// <sample_id>_ch<k>.png into dir. Returns the written paths.
std::vector<std::string> dump_heatmap_pngs(const HeatmapStack& stack, const std::string& dir,
                                           const std::string& sample_id);

}  // namespace thermohand
