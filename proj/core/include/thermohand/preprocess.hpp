#pragma once

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "thermohand/types.hpp"

namespace thermohand {

class PreprocessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PixelCoord {
  int x = 0, y = 0;
  bool operator==(const PixelCoord&) const = default;
};

struct SegmentationConfig {
  int frame_width = 640;
  int frame_height = 480;
  int roi_height = 440;
  int roi_top = 0;                        // which rows the ROI keeps, top-anchored
  std::optional<double> diff_threshold;   // absolute intensity; nullopt = Otsu
  int hand_count = 1;                     // k for k-means, 1 or 2
  int min_blob_area = 400;                // clusters smaller than this are dropped
  int output_size = 100;
};

struct AugmentationSpec {
  std::vector<double> rotation_angles;      // degrees
  std::vector<double> forearm_fractions;    // exactly 10 lengths

  static AugmentationSpec defaults();
};

/// Fixed crop to the tabletop region: keeps roi_height rows starting at
/// roi_top, all columns. Throws on unexpected frame dimensions.
GrayImage16 crop_roi(const GrayImage16& frame, const SegmentationConfig& cfg);

/// |frame - background| > threshold. When cfg.diff_threshold is empty the
/// threshold comes from Otsu's method on the absolute-difference histogram.
BinaryImage background_subtract(const GrayImage16& frame, const GrayImage16& background,
                                const SegmentationConfig& cfg);

/// Otsu threshold over a value histogram: maximizes the between-class
/// variance of {v <= t} vs {v > t}; smallest maximizing t wins.
int otsu_threshold(const std::vector<std::uint64_t>& histogram);

/// k-means over foreground pixel coordinates. k = cfg.hand_count; k=2 is
/// initialized from the two extreme foreground pixels along the principal
/// axis, k=1 from the centroid. Runs Lloyd iterations to assignment
/// convergence (or 100 iterations); clusters below min_blob_area are dropped.
std::vector<std::vector<PixelCoord>> isolate_hands(const BinaryImage& mask,
                                                   const SegmentationConfig& cfg);

/// Affine frame <-> crop mapping on pixel-center coordinates.
struct CropTransform {
  double origin_x = 0, origin_y = 0;  // frame coordinates of the crop origin
  double scale = 1.0;                 // output pixels per frame pixel

  Point2 to_output(const Point2& frame_pt) const {
    return {(frame_pt.x + 0.5 - origin_x) * scale - 0.5,
            (frame_pt.y + 0.5 - origin_y) * scale - 0.5};
  }
  Point2 to_frame(const Point2& out_pt) const {
    return {(out_pt.x + 0.5) / scale + origin_x - 0.5,
            (out_pt.y + 0.5) / scale + origin_y - 0.5};
  }
};

/// Tight axis-aligned crop of one cluster, padded square, nearest-neighbor
/// resized to output_size. Output contains only the cluster's pixels and
/// stays strictly binary.
std::pair<BinaryImage, CropTransform> tight_crop_resize(const BinaryImage& mask,
                                                        const std::vector<PixelCoord>& cluster,
                                                        int output_size);

/// Rotates image and keypoints rigidly about the image center with
/// nearest-neighbor sampling and background fill. Throws PreprocessError if a
/// keypoint leaves the frame.
Sample augment_rotation(const Sample& s, double angle_deg);

/// Truncates the silhouette beyond the wrist line: foreground farther than
/// fraction * (max available forearm extent) on the non-finger side is
/// cleared. Keypoints are unchanged.
Sample augment_forearm(const Sample& s, double fraction);

}  // namespace thermohand
