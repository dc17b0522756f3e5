#include "thermohand/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace thermohand {

AugmentationSpec AugmentationSpec::defaults() {
  AugmentationSpec spec;
  for (int a = -90; a <= 90; a += 15) spec.rotation_angles.push_back(a);
  for (int i = 0; i < 10; ++i) spec.forearm_fractions.push_back(i / 10.0);
  return spec;
}

GrayImage16 crop_roi(const GrayImage16& frame, const SegmentationConfig& cfg) {
  if (frame.width != cfg.frame_width || frame.height != cfg.frame_height)
    throw PreprocessError("expected a " + std::to_string(cfg.frame_width) + "x" +
                          std::to_string(cfg.frame_height) + " frame, got " +
                          std::to_string(frame.width) + "x" + std::to_string(frame.height));
  if (cfg.roi_top + cfg.roi_height > frame.height)
    throw PreprocessError("ROI exceeds frame height");

  GrayImage16 out(frame.width, cfg.roi_height);
  for (int y = 0; y < cfg.roi_height; ++y)
    for (int x = 0; x < frame.width; ++x) out.at(x, y) = frame.at(x, cfg.roi_top + y);
  return out;
}

int otsu_threshold(const std::vector<std::uint64_t>& histogram) {
  const std::uint64_t total = std::accumulate(histogram.begin(), histogram.end(), std::uint64_t{0});
  if (total == 0) return 0;

  double sum_all = 0;
  for (size_t v = 0; v < histogram.size(); ++v) sum_all += static_cast<double>(v) * histogram[v];

  double best_var = -1.0;
  int best_t = 0;
  double w0 = 0, sum0 = 0;
  // Classes: {v <= t} and {v > t}.
  for (size_t t = 0; t + 1 < histogram.size(); ++t) {
    w0 += histogram[t];
    sum0 += static_cast<double>(t) * histogram[t];
    const double w1 = static_cast<double>(total) - w0;
    if (w0 == 0 || w1 == 0) continue;
    const double mu0 = sum0 / w0;
    const double mu1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best_var) {
      best_var = between;
      best_t = static_cast<int>(t);
    }
  }
  return best_t;
}

BinaryImage background_subtract(const GrayImage16& frame, const GrayImage16& background,
                                const SegmentationConfig& cfg) {
  if (frame.width != background.width || frame.height != background.height)
    throw PreprocessError("frame/background dimension mismatch");

  std::vector<int> diff(frame.data.size());
  int max_diff = 0;
  for (size_t i = 0; i < frame.data.size(); ++i) {
    diff[i] = std::abs(static_cast<int>(frame.data[i]) - static_cast<int>(background.data[i]));
    max_diff = std::max(max_diff, diff[i]);
  }

  double threshold;
  if (cfg.diff_threshold) {
    threshold = *cfg.diff_threshold;
  } else {
    std::vector<std::uint64_t> hist(static_cast<size_t>(max_diff) + 1, 0);
    for (int d : diff) hist[d]++;
    threshold = otsu_threshold(hist);
  }

  BinaryImage mask(frame.width, frame.height);
  for (size_t i = 0; i < diff.size(); ++i) mask.data[i] = diff[i] > threshold ? 1 : 0;
  return mask;
}

namespace {

std::vector<PixelCoord> foreground_pixels(const BinaryImage& mask) {
  std::vector<PixelCoord> pts;
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(x, y)) pts.push_back({x, y});
  return pts;
}

}  // namespace

std::vector<std::vector<PixelCoord>> isolate_hands(const BinaryImage& mask,
                                                   const SegmentationConfig& cfg) {
  const int k = cfg.hand_count;
  if (k != 1 && k != 2) throw PreprocessError("hand_count must be 1 or 2");

  const std::vector<PixelCoord> pts = foreground_pixels(mask);
  if (static_cast<long long>(pts.size()) < static_cast<long long>(k) * cfg.min_blob_area)
    throw PreprocessError("insufficient foreground for " + std::to_string(k) + " hands");

  double mx = 0, my = 0;
  for (const auto& p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= pts.size();
  my /= pts.size();

  std::vector<Point2> centers;
  if (k == 1) {
    centers = {{mx, my}};
  } else {
    // Principal axis of the coordinate covariance; init = extreme pixels
    // along it (first row-major occurrence wins projection ties).
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& p : pts) {
      const double dx = p.x - mx, dy = p.y - my;
      sxx += dx * dx;
      sxy += dx * dy;
      syy += dy * dy;
    }
    const double tr = sxx + syy, det = sxx * syy - sxy * sxy;
    const double lambda = tr / 2 + std::sqrt(std::max(0.0, tr * tr / 4 - det));
    Point2 axis{1.0, 0.0};
    if (std::abs(sxy) > 1e-12)
      axis = {lambda - syy, sxy};
    else if (syy > sxx)
      axis = {0.0, 1.0};
    const double norm = std::hypot(axis.x, axis.y);
    axis = {axis.x / norm, axis.y / norm};

    size_t lo = 0, hi = 0;
    double lo_proj = std::numeric_limits<double>::infinity(), hi_proj = -lo_proj;
    for (size_t i = 0; i < pts.size(); ++i) {
      const double proj = (pts[i].x - mx) * axis.x + (pts[i].y - my) * axis.y;
      if (proj < lo_proj) {
        lo_proj = proj;
        lo = i;
      }
      if (proj > hi_proj) {
        hi_proj = proj;
        hi = i;
      }
    }
    centers = {{static_cast<double>(pts[lo].x), static_cast<double>(pts[lo].y)},
               {static_cast<double>(pts[hi].x), static_cast<double>(pts[hi].y)}};
  }

  std::vector<int> assign(pts.size(), 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (size_t i = 0; i < pts.size(); ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double dx = pts[i].x - centers[c].x, dy = pts[i].y - centers[c].y;
        const double d = dx * dx + dy * dy;
        if (d < best_d) {  // ties keep the lower cluster index
          best_d = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    for (int c = 0; c < k; ++c) {
      double sx = 0, sy = 0;
      int n = 0;
      for (size_t i = 0; i < pts.size(); ++i) {
        if (assign[i] != c) continue;
        sx += pts[i].x;
        sy += pts[i].y;
        n++;
      }
      if (n > 0) centers[c] = {sx / n, sy / n};
    }
  }

  std::vector<std::vector<PixelCoord>> clusters(k);
  for (size_t i = 0; i < pts.size(); ++i) clusters[assign[i]].push_back(pts[i]);
  std::vector<std::vector<PixelCoord>> kept;
  for (auto& c : clusters)
    if (static_cast<int>(c.size()) >= cfg.min_blob_area) kept.push_back(std::move(c));
  return kept;
}

std::pair<BinaryImage, CropTransform> tight_crop_resize(const BinaryImage& mask,
                                                        const std::vector<PixelCoord>& cluster,
                                                        int output_size) {
  if (cluster.empty()) throw PreprocessError("empty cluster");

  int min_x = mask.width, min_y = mask.height, max_x = -1, max_y = -1;
  for (const auto& p : cluster) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  const int w = max_x - min_x + 1, h = max_y - min_y + 1;
  const int side = std::max(w, h);
  const int pad_left = (side - w) / 2;
  const int pad_top = (side - h) / 2;

  // Cluster membership bitmap restricted to the bounding box.
  BinaryImage member(w, h, 0);
  for (const auto& p : cluster) member.at(p.x - min_x, p.y - min_y) = 1;

  CropTransform tf;
  tf.origin_x = min_x - pad_left;
  tf.origin_y = min_y - pad_top;
  tf.scale = static_cast<double>(output_size) / side;

  BinaryImage out(output_size, output_size, 0);
  for (int oy = 0; oy < output_size; ++oy) {
    for (int ox = 0; ox < output_size; ++ox) {
      const int sx = static_cast<int>(std::floor((ox + 0.5) / tf.scale)) - pad_left;
      const int sy = static_cast<int>(std::floor((oy + 0.5) / tf.scale)) - pad_top;
      if (sx >= 0 && sx < w && sy >= 0 && sy < h && member.at(sx, sy)) out.at(ox, oy) = 1;
    }
  }
  return {std::move(out), tf};
}

namespace {

Point2 rotate_keypoint(const Point2& p, const Point2& c, double rad) {
  const double co = std::cos(rad), si = std::sin(rad);
  const double dx = p.x - c.x, dy = p.y - c.y;
  return {c.x + co * dx + si * dy, c.y - si * dx + co * dy};
}

}  // namespace

Sample augment_rotation(const Sample& s, double angle_deg) {
  const double rad = angle_deg * M_PI / 180.0;
  const Point2 center{(s.image.width - 1) / 2.0, (s.image.height - 1) / 2.0};

  Sample out = s;
  if (angle_deg == 0.0) return out;

  // out(q) = in(R^-1 q), nearest neighbor, background fill.
  const double co = std::cos(-rad), si = std::sin(-rad);
  for (int y = 0; y < s.image.height; ++y) {
    for (int x = 0; x < s.image.width; ++x) {
      const double dx = x - center.x, dy = y - center.y;
      const int sx = static_cast<int>(std::lround(center.x + co * dx + si * dy));
      const int sy = static_cast<int>(std::lround(center.y - si * dx + co * dy));
      out.image.at(x, y) = s.image.in_bounds(sx, sy) ? s.image.at(sx, sy) : 0;
    }
  }

  auto rotate_checked = [&](const Point2& p, const char* what) {
    const Point2 r = rotate_keypoint(p, center, rad);
    if (r.x < 0 || r.x >= s.image.width || r.y < 0 || r.y >= s.image.height)
      throw PreprocessError(std::string("rotation moves ") + what + " out of frame");
    return r;
  };
  for (int f = 0; f < kNumFingers; ++f)
    if (s.keypoints.fingertips[f])
      out.keypoints.fingertips[f] = rotate_checked(*s.keypoints.fingertips[f], finger_name(f));
  out.keypoints.wrists[0] = rotate_checked(s.keypoints.wrists[0], "wrist 0");
  out.keypoints.wrists[1] = rotate_checked(s.keypoints.wrists[1], "wrist 1");

  out.meta.note += (out.meta.note.empty() ? "" : ";") + std::string("rot=") +
                   std::to_string(angle_deg);
  return out;
}

Sample augment_forearm(const Sample& s, double fraction) {
  const Point2& w0 = s.keypoints.wrists[0];
  const Point2& w1 = s.keypoints.wrists[1];
  const Point2 mid{(w0.x + w1.x) / 2, (w0.y + w1.y) / 2};

  // Unit normal of the wrist line pointing away from the fingertip side.
  Point2 normal{-(w1.y - w0.y), w1.x - w0.x};
  const double n = std::hypot(normal.x, normal.y);
  if (n == 0) throw PreprocessError("wrist points coincide");
  normal = {normal.x / n, normal.y / n};

  const std::vector<Point2> tips = s.keypoints.visible_points();
  Point2 centroid = mid;
  if (!tips.empty()) {
    centroid = {0, 0};
    for (const Point2& t : tips) {
      centroid.x += t.x / tips.size();
      centroid.y += t.y / tips.size();
    }
  }
  if ((centroid.x - mid.x) * normal.x + (centroid.y - mid.y) * normal.y > 0)
    normal = {-normal.x, -normal.y};

  auto signed_dist = [&](int x, int y) {
    return (x - mid.x) * normal.x + (y - mid.y) * normal.y;
  };

  double max_extent = 0.0;
  for (int y = 0; y < s.image.height; ++y)
    for (int x = 0; x < s.image.width; ++x)
      if (s.image.at(x, y)) max_extent = std::max(max_extent, signed_dist(x, y));

  const double cut = fraction * max_extent;
  Sample out = s;
  for (int y = 0; y < s.image.height; ++y)
    for (int x = 0; x < s.image.width; ++x)
      if (out.image.at(x, y) && signed_dist(x, y) > cut) out.image.at(x, y) = 0;

  out.meta.note += (out.meta.note.empty() ? "" : ";") + std::string("forearm=") +
                   std::to_string(fraction);
  return out;
}

}  // namespace thermohand
