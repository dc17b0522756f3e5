#include "thermohand/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "thermohand/annotation.hpp"
#include "thermohand/heatmap.hpp"
#include "thermohand/image_io.hpp"
#include "thermohand/refine.hpp"

namespace thermohand {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c,
                          std::uint64_t d) {
  // splitmix64 over the mixed-in stream position
  std::uint64_t z = base;
  for (std::uint64_t v : {a, b, c, d}) {
    z += 0x9e3779b97f4a7c15ULL + v;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z = z ^ (z >> 31);
  }
  return z;
}

UserParams sample_user_params(std::mt19937_64& rng) {
  auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  UserParams u;
  u.palm_rx = uni(13.0, 17.0);
  u.palm_ry = uni(11.0, 15.0);
  u.wrist_width = uni(16.0, 24.0);
  u.wrist_drop = uni(0.7, 0.9);
  // Fan directions for a canonical right hand (degrees; 90 = straight up,
  // larger = toward the thumb side on the image left).
  const double base_angles[kNumFingers] = {152.0, 112.0, 90.0, 68.0, 46.0};
  for (int f = 0; f < kNumFingers; ++f) {
    u.finger_angle_deg[f] = base_angles[f] + uni(-4.0, 4.0);
    u.finger_halfwidth[f] = uni(2.6, 3.8);
  }
  u.finger_length[kThumb] = uni(16.0, 21.0);
  u.finger_length[kIndex] = uni(22.0, 28.0);
  u.finger_length[kMiddle] = uni(25.0, 31.0);
  u.finger_length[kRing] = uni(22.0, 28.0);
  u.finger_length[kLittle] = uni(16.0, 21.0);
  u.forearm_halfwidth = std::max(u.wrist_width * 0.55, uni(10.0, 13.0));
  u.angle_jitter_deg = uni(1.5, 3.0);
  u.length_jitter = uni(1.0, 2.5);
  u.center_jitter = uni(3.0, 6.0);
  return u;
}

namespace {

struct Capsule {
  Point2 a, b;
  double radius;
};

struct RotatedEllipse {
  Point2 center;
  double rx, ry;
  double angle_rad;  // rotation of the ellipse frame
};

double point_segment_dist(const Point2& p, const Point2& a, const Point2& b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

bool inside_ellipse(const Point2& p, const RotatedEllipse& e) {
  const double c = std::cos(-e.angle_rad), s = std::sin(-e.angle_rad);
  const double dx = p.x - e.center.x, dy = p.y - e.center.y;
  const double lx = c * dx - s * dy, ly = s * dx + c * dy;
  return (lx * lx) / (e.rx * e.rx) + (ly * ly) / (e.ry * e.ry) <= 1.0;
}

/// Full hand geometry in frame coordinates, ready to rasterize.
struct HandGeometry {
  RotatedEllipse palm;
  std::vector<Capsule> capsules;  // fingers + forearm
  std::array<std::optional<Point2>, kNumFingers> tips;
  std::array<Point2, 2> wrists;  // [0] = thumb side
};

Point2 rotate_about(const Point2& p, const Point2& c, double rad) {
  // Positive angle rotates the "up" direction (-y) toward +x (clockwise on
  // screen); consistent with preprocess::augment_rotation.
  const double co = std::cos(rad), si = std::sin(rad);
  const double dx = p.x - c.x, dy = p.y - c.y;
  return {c.x + co * dx + si * dy, c.y - si * dx + co * dy};
}

Point2 mirror_x(const Point2& p, int width) { return {(width - 1) - p.x, p.y}; }

BinaryImage rasterize(const HandGeometry& g, int size) {
  BinaryImage img(size, size, 0);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const Point2 p{static_cast<double>(x), static_cast<double>(y)};
      bool fg = inside_ellipse(p, g.palm);
      for (size_t i = 0; !fg && i < g.capsules.size(); ++i)
        fg = point_segment_dist(p, g.capsules[i].a, g.capsules[i].b) <= g.capsules[i].radius;
      img.at(x, y) = fg ? 1 : 0;
    }
  }
  return img;
}

struct GeometryCheck {
  bool ok = false;
  std::string reason;
};

GeometryCheck check_geometry(const HandGeometry& g, Handedness hand, double min_gap_deg) {
  auto fail = [](std::string why) { return GeometryCheck{false, std::move(why)}; };

  std::vector<Point2> tips;
  for (const auto& t : g.tips)
    if (t) tips.push_back(*t);

  for (const Point2& p : tips)
    if (p.x < 2 || p.x > kInputSize - 3 || p.y < 2 || p.y > kInputSize - 3)
      return fail("fingertip near frame edge");
  for (const Point2& w : g.wrists)
    if (w.x < 2 || w.x > kInputSize - 3 || w.y < 2 || w.y > kInputSize - 3)
      return fail("wrist near frame edge");

  if (distance(g.wrists[0], g.wrists[1]) < 14.0) return fail("wrists too close");

  // Quantized view: what a noiseless encode/decode round trip will see.
  auto quantize = [](const Point2& p) {
    return Point2{static_cast<double>(to_heatmap_pixel(p.x)),
                  static_cast<double>(to_heatmap_pixel(p.y))};
  };
  const Point2 qw0 = quantize(g.wrists[0]), qw1 = quantize(g.wrists[1]);
  if (distance(qw0, qw1) <= 6.0) return fail("wrist heatmap separation too small");

  std::vector<Point2> qtips;
  for (const Point2& t : tips) qtips.push_back(quantize(t));
  for (size_t i = 0; i < qtips.size(); ++i)
    for (size_t j = i + 1; j < qtips.size(); ++j)
      if (qtips[i] == qtips[j]) return fail("fingertips collide on the heatmap grid");

  // Chirality margin and the anatomical angle ordering, both on the true
  // points and on the quantized ones.
  auto ordered = [&](const std::array<Point2, 2>& wrists, const std::vector<Point2>& pts,
                     double gap) -> GeometryCheck {
    int origin;
    try {
      origin = select_origin_wrist(wrists, pts, hand);
    } catch (const DegenerateGeometry&) {
      return {false, "degenerate chirality"};
    }
    if (origin != 0) return {false, "origin rule does not pick the thumb-side wrist"};
    std::vector<double> angles = finger_angles(wrists[0], wrists[1], pts);
    for (size_t i = 0; i + 1 < angles.size(); ++i)
      if (angles[i] - angles[i + 1] < gap) return {false, "angle gap too small"};
    return {true, ""};
  };

  if (tips.empty()) return fail("no visible fingertips");
  if (auto r = ordered(g.wrists, tips, min_gap_deg); !r.ok) return r;
  if (auto r = ordered({qw0, qw1}, qtips, 1.5); !r.ok)
    return {false, "quantized " + r.reason};

  // Robust chirality margin (well above the refiner epsilon).
  Point2 centroid{0, 0};
  for (const Point2& t : tips) {
    centroid.x += t.x / tips.size();
    centroid.y += t.y / tips.size();
  }
  const Point2 mid{(g.wrists[0].x + g.wrists[1].x) / 2, (g.wrists[0].y + g.wrists[1].y) / 2};
  const Point2 d{centroid.x - mid.x, centroid.y - mid.y};
  const Point2 w0{g.wrists[0].x - mid.x, g.wrists[0].y - mid.y};
  if (std::abs(cross(d, w0)) < 4.0) return fail("weak chirality margin");

  return {true, ""};
}

HandGeometry build_geometry(GestureClass gesture, Handedness hand, const UserParams& user,
                            const GeneratorSpec& spec, const GestureVocabulary& vocab,
                            std::mt19937_64& rng) {
  auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  const FingerMask& mask = vocab.mask(gesture);

  const double deg2rad = M_PI / 180.0;
  const Point2 palm_center{kInputSize / 2.0 + uni(-user.center_jitter, user.center_jitter),
                           55.0 + uni(-user.center_jitter, user.center_jitter)};
  const double rot = uni(-spec.rotation_range_deg, spec.rotation_range_deg) * deg2rad;

  HandGeometry g;
  g.palm = {palm_center, user.palm_rx + uni(-1.0, 1.0), user.palm_ry + uni(-1.0, 1.0), 0.0};

  // Wrist points on the palm's proximal edge; [0] is the thumb side, which
  // for the canonical (unmirrored) right hand is the image-left wrist.
  const double wrist_y = palm_center.y + user.wrist_drop * g.palm.ry;
  const double half_w = user.wrist_width / 2.0 + uni(-1.0, 1.0);
  g.wrists[0] = {palm_center.x - half_w, wrist_y};
  g.wrists[1] = {palm_center.x + half_w, wrist_y};

  // Forearm: a wide capsule from the wrist midpoint toward the frame bottom.
  // Its length is a sampled fraction of the available extent so training sees
  // sleeve-length variation.
  const Point2 wrist_mid{palm_center.x, wrist_y};
  double fraction = 0.5;
  if (!spec.forearm_fractions.empty()) {
    std::uniform_int_distribution<size_t> pick(0, spec.forearm_fractions.size() - 1);
    fraction = spec.forearm_fractions[pick(rng)];
  }
  const double max_extent = (kInputSize - 4) - wrist_y;
  if (max_extent > 0 && fraction > 0) {
    g.capsules.push_back(
        {wrist_mid, {wrist_mid.x, wrist_mid.y + fraction * max_extent}, user.forearm_halfwidth});
  }

  for (int f = 0; f < kNumFingers; ++f) {
    if (!mask[f]) continue;
    const double ang = (user.finger_angle_deg[f] +
                        uni(-user.angle_jitter_deg, user.angle_jitter_deg)) * deg2rad;
    const Point2 dir{std::cos(ang), -std::sin(ang)};  // y axis points down
    const double palm_r =
        1.0 / std::hypot(dir.x / g.palm.rx, dir.y / g.palm.ry);  // palm radius along dir
    const double len = user.finger_length[f] + uni(-user.length_jitter, user.length_jitter);
    const Point2 base{palm_center.x + dir.x * (palm_r - 2.0),
                      palm_center.y + dir.y * (palm_r - 2.0)};
    const Point2 tip{palm_center.x + dir.x * (palm_r + len),
                     palm_center.y + dir.y * (palm_r + len)};
    g.capsules.push_back({base, tip, user.finger_halfwidth[f]});
    g.tips[f] = tip;
  }

  // Rigid rotation of the whole geometry about the palm center.
  if (rot != 0.0) {
    auto rot_pt = [&](const Point2& p) { return rotate_about(p, palm_center, rot); };
    g.palm.angle_rad = rot;
    for (Capsule& c : g.capsules) {
      c.a = rot_pt(c.a);
      c.b = rot_pt(c.b);
    }
    for (auto& t : g.tips)
      if (t) t = rot_pt(*t);
    g.wrists[0] = rot_pt(g.wrists[0]);
    g.wrists[1] = rot_pt(g.wrists[1]);
  }

  if (hand == Handedness::Left) {
    auto mir = [&](const Point2& p) { return mirror_x(p, kInputSize); };
    g.palm.center = mir(g.palm.center);
    g.palm.angle_rad = -g.palm.angle_rad;
    for (Capsule& c : g.capsules) {
      c.a = mir(c.a);
      c.b = mir(c.b);
    }
    for (auto& t : g.tips)
      if (t) t = mir(*t);
    g.wrists[0] = mir(g.wrists[0]);
    g.wrists[1] = mir(g.wrists[1]);
  }

  // Ground-truth keypoints are snapped to integer pixels.
  auto snap = [](Point2& p) {
    p.x = std::lround(p.x);
    p.y = std::lround(p.y);
  };
  for (auto& t : g.tips)
    if (t) snap(*t);
  snap(g.wrists[0]);
  snap(g.wrists[1]);
  return g;
}

}  // namespace

SynthSample generate_sample(GestureClass gesture, Handedness hand, const UserParams& user,
                            const GeneratorSpec& spec, const GestureVocabulary& vocab,
                            std::mt19937_64& rng) {
  constexpr int kMaxAttempts = 100;
  std::string last_reason = "unknown";
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    HandGeometry g = build_geometry(gesture, hand, user, spec, vocab, rng);
    GeometryCheck check = check_geometry(g, hand, spec.min_angle_gap_deg);
    if (!check.ok) {
      last_reason = check.reason;
      continue;
    }
    SynthSample out;
    out.sample.image = rasterize(g, kInputSize);
    out.sample.gesture = gesture;
    out.sample.handedness = hand;
    out.sample.keypoints.fingertips = g.tips;
    out.sample.keypoints.wrists = g.wrists;
    out.thumb_side_wrist = 0;
    const auto issues = validate_sample(out.sample, vocab);
    if (!issues.empty()) {
      last_reason = issues.front();
      continue;
    }
    return out;
  }
  throw GenerationError("could not generate a valid sample after " +
                        std::to_string(kMaxAttempts) + " attempts (last: " + last_reason + ")");
}

std::vector<const ManifestEntry*> DatasetManifest::split_entries(const std::string& split) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries)
    if (e.split == split) out.push_back(&e);
  return out;
}

namespace {

std::string entry_stem(int user, int gesture, Handedness hand, int index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "u%02d_G%02d_%c_%03d", user, gesture,
                hand == Handedness::Left ? 'L' : 'R', index);
  return buf;
}

json counts_json(const DatasetManifest& m, const std::string& split) {
  std::array<int, kNumGestures> per_gesture{};
  int left = 0, right = 0;
  for (const auto& e : m.entries) {
    if (!split.empty() && e.split != split) continue;
    per_gesture[e.gesture - 1]++;
    (e.hand == Handedness::Left ? left : right)++;
  }
  json j = json::object();
  for (int g = 0; g < kNumGestures; ++g) j["G" + std::to_string(g + 1)] = per_gesture[g];
  j["left"] = left;
  j["right"] = right;
  return j;
}

}  // namespace

std::string manifest_to_json(const DatasetManifest& m, const GestureVocabulary& vocab) {
  json j;
  j["schema_version"] = 1;
  j["seed"] = m.seed;
  j["users"] = m.users;
  j["test_users"] = m.test_users;
  j["samples_per_gesture_per_hand"] = m.samples_per_gesture_per_hand;
  j["counts"]["train"] = counts_json(m, "train");
  j["counts"]["test"] = counts_json(m, "test");
  j["counts"]["total"] = counts_json(m, "");
  j["vocabulary"] = json::parse(vocab.to_json_text());
  json entries = json::array();
  for (const auto& e : m.entries) {
    entries.push_back({{"stem", e.stem},
                       {"user", e.user},
                       {"gesture", e.gesture},
                       {"hand", to_string(e.hand)},
                       {"split", e.split},
                       {"seed", e.seed}});
  }
  j["entries"] = entries;
  return j.dump(2);
}

DatasetManifest manifest_from_json(const std::string& text) {
  json j = json::parse(text);
  DatasetManifest m;
  m.seed = j.at("seed").get<std::uint64_t>();
  m.users = j.at("users").get<int>();
  m.test_users = j.at("test_users").get<int>();
  m.samples_per_gesture_per_hand = j.at("samples_per_gesture_per_hand").get<int>();
  for (const auto& e : j.at("entries")) {
    ManifestEntry entry;
    entry.stem = e.at("stem").get<std::string>();
    entry.user = e.at("user").get<int>();
    entry.gesture = e.at("gesture").get<int>();
    entry.hand = e.at("hand").get<std::string>() == "left" ? Handedness::Left : Handedness::Right;
    entry.split = e.at("split").get<std::string>();
    entry.seed = e.at("seed").get<std::uint64_t>();
    m.entries.push_back(std::move(entry));
  }
  return m;
}

DatasetManifest generate_dataset(const GeneratorSpec& spec, const GestureVocabulary& vocab,
                                 const std::string& out_dir) {
  if (spec.users < 1) throw GenerationError("spec.users must be >= 1");
  if (spec.test_users < 0 || spec.test_users >= spec.users)
    throw GenerationError("spec.test_users must be in [0, users)");
  if (spec.samples_per_gesture_per_hand < 1)
    throw GenerationError("samples_per_gesture_per_hand must be >= 1");

  fs::create_directories(fs::path(out_dir) / "samples");

  DatasetManifest manifest;
  manifest.seed = spec.seed;
  manifest.users = spec.users;
  manifest.test_users = spec.test_users;
  manifest.samples_per_gesture_per_hand = spec.samples_per_gesture_per_hand;

  for (int user = 0; user < spec.users; ++user) {
    std::mt19937_64 user_rng(derive_seed(spec.seed, 0x75736572ULL /* "user" */, user));
    const UserParams params = sample_user_params(user_rng);
    const std::string split = user >= spec.users - spec.test_users ? "test" : "train";
    for (int g = 1; g <= kNumGestures; ++g) {
      for (Handedness hand : {Handedness::Left, Handedness::Right}) {
        for (int i = 0; i < spec.samples_per_gesture_per_hand; ++i) {
          const std::uint64_t sample_seed =
              derive_seed(spec.seed, user, g, static_cast<int>(hand), i);
          std::mt19937_64 rng(sample_seed);
          SynthSample synth = generate_sample(GestureClass(g), hand, params, spec, vocab, rng);
          ManifestEntry entry{entry_stem(user, g, hand, i), user, g, hand, split, sample_seed};
          synth.sample.meta = {entry.stem, user, sample_seed, ""};

          const fs::path base = fs::path(out_dir) / "samples" / entry.stem;
          write_mask_png(base.string() + ".png", synth.sample.image);
          write_annotation(base.string() + ".json",
                           {synth.sample.gesture, synth.sample.handedness, synth.sample.keypoints});
          manifest.entries.push_back(std::move(entry));
        }
      }
    }
  }

  std::ofstream out(fs::path(out_dir) / "manifest.json");
  if (!out) throw GenerationError("cannot write manifest under " + out_dir);
  out << manifest_to_json(manifest, vocab) << "\n";
  return manifest;
}

}  // namespace thermohand
