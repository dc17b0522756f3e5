#include <doctest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "thermohand/preprocess.hpp"

using namespace thermohand;

TEST_CASE("crop_roi keeps the top 440 rows and preserves values") {
  GrayImage16 frame(640, 480, 100);
  frame.at(5, 10) = 4321;
  frame.at(5, 470) = 9999;  // dropped row
  const SegmentationConfig cfg;
  const GrayImage16 out = crop_roi(frame, cfg);
  CHECK(out.width == 640);
  CHECK(out.height == 440);
  CHECK(out.at(5, 10) == 4321);
}

TEST_CASE("crop_roi rejects wrong input dimensions") {
  const SegmentationConfig cfg;
  GrayImage16 frame(640, 440, 0);
  CHECK_THROWS_AS(crop_roi(frame, cfg), PreprocessError);
}

TEST_CASE("background_subtract of identical frames is empty") {
  GrayImage16 frame(64, 48, 0);
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> val(0, 65535);
  for (auto& v : frame.data) v = static_cast<std::uint16_t>(val(rng));
  SegmentationConfig cfg;
  const BinaryImage mask = background_subtract(frame, frame, cfg);
  for (auto v : mask.data) CHECK(v == 0);
}

TEST_CASE("background_subtract with a fixed threshold isolates the hand region") {
  GrayImage16 background(64, 48, 1000);
  GrayImage16 frame = background;
  for (int y = 10; y < 20; ++y)
    for (int x = 10; x < 30; ++x) frame.at(x, y) = 5000;
  SegmentationConfig cfg;
  cfg.diff_threshold = 2000.0;
  const BinaryImage mask = background_subtract(frame, background, cfg);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x)
      CHECK(mask.at(x, y) == ((x >= 10 && x < 30 && y >= 10 && y < 20) ? 1 : 0));
}

TEST_CASE("otsu threshold matches exhaustive between-class variance maximization") {
  // bimodal synthetic difference histogram with noise
  std::mt19937_64 rng(9);
  std::normal_distribution<double> lo(40.0, 6.0), hi(180.0, 12.0);
  std::vector<std::uint64_t> hist(256, 0);
  for (int i = 0; i < 6000; ++i) {
    const int v = std::clamp(static_cast<int>(std::lround(lo(rng))), 0, 255);
    hist[v]++;
  }
  for (int i = 0; i < 2500; ++i) {
    const int v = std::clamp(static_cast<int>(std::lround(hi(rng))), 0, 255);
    hist[v]++;
  }

  // Oracle: direct evaluation of the between-class variance for every t.
  const double total = 8500.0;
  double best = -1.0;
  int best_t = 0;
  for (int t = 0; t + 1 < 256; ++t) {
    double w0 = 0, m0 = 0, w1 = 0, m1 = 0;
    for (int v = 0; v <= t; ++v) {
      w0 += hist[v];
      m0 += static_cast<double>(v) * hist[v];
    }
    for (int v = t + 1; v < 256; ++v) {
      w1 += hist[v];
      m1 += static_cast<double>(v) * hist[v];
    }
    if (w0 == 0 || w1 == 0) continue;
    const double mu0 = m0 / w0, mu1 = m1 / w1;
    const double sb = (w0 / total) * (w1 / total) * (mu0 - mu1) * (mu0 - mu1);
    if (sb > best) {
      best = sb;
      best_t = t;
    }
  }

  const int got = otsu_threshold(hist);
  CHECK(got == best_t);
  CHECK(got > 60);   // threshold falls between the two modes
  CHECK(got < 160);
}

TEST_CASE("otsu-driven subtraction separates a bimodal difference image") {
  GrayImage16 background(64, 48, 1000);
  GrayImage16 frame = background;
  std::mt19937_64 rng(12);
  std::normal_distribution<double> noise(0.0, 5.0);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x) {
      const bool hand = x >= 20 && x < 44 && y >= 12 && y < 36;
      const double base = hand ? 3000.0 : 1020.0;
      frame.at(x, y) = static_cast<std::uint16_t>(std::lround(base + noise(rng)));
    }
  SegmentationConfig cfg;  // diff_threshold unset -> Otsu
  const BinaryImage mask = background_subtract(frame, background, cfg);
  int wrong = 0;
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x) {
      const bool hand = x >= 20 && x < 44 && y >= 12 && y < 36;
      if (mask.at(x, y) != (hand ? 1 : 0)) wrong++;
    }
  CHECK(wrong == 0);
}

TEST_CASE("isolate_hands separates two disjoint blobs with k=2") {
  BinaryImage mask(200, 100, 0);
  for (int y = 20; y < 50; ++y) {
    for (int x = 10; x < 40; ++x) mask.at(x, y) = 1;    // blob A: 900 px
    for (int x = 150; x < 180; ++x) mask.at(x, y) = 1;  // blob B: 900 px
  }
  SegmentationConfig cfg;
  cfg.hand_count = 2;
  const auto clusters = isolate_hands(mask, cfg);
  REQUIRE(clusters.size() == 2);
  CHECK(clusters[0].size() == 900);
  CHECK(clusters[1].size() == 900);
  // clusters never overlap and each blob is pure
  for (const auto& p : clusters[0]) CHECK(p.x < 100);
  for (const auto& p : clusters[1]) CHECK(p.x >= 100);
}

TEST_CASE("isolate_hands with k=1 returns the whole blob") {
  BinaryImage mask(100, 100, 0);
  for (int y = 10; y < 40; ++y)
    for (int x = 10; x < 40; ++x) mask.at(x, y) = 1;
  SegmentationConfig cfg;
  const auto clusters = isolate_hands(mask, cfg);
  REQUIRE(clusters.size() == 1);
  CHECK(clusters[0].size() == 900);
}

TEST_CASE("isolate_hands rejects insufficient foreground") {
  BinaryImage mask(100, 100, 0);
  mask.at(5, 5) = 1;
  SegmentationConfig cfg;
  CHECK_THROWS_AS(isolate_hands(mask, cfg), PreprocessError);
}

TEST_CASE("touching blobs partition matches an independent Lloyd fixed point") {
  // Two merged squares; same principal-axis extreme initialization.
  BinaryImage mask(120, 60, 0);
  for (int y = 15; y < 45; ++y)
    for (int x = 20; x < 80; ++x) mask.at(x, y) = 1;
  for (int y = 10; y < 50; ++y)
    for (int x = 80; x < 110; ++x) mask.at(x, y) = 1;

  SegmentationConfig cfg;
  cfg.hand_count = 2;
  const auto clusters = isolate_hands(mask, cfg);
  REQUIRE(clusters.size() == 2);

  // Oracle: plain Lloyd iteration run to its fixed point with the same init.
  std::vector<PixelCoord> pts;
  for (int y = 0; y < 60; ++y)
    for (int x = 0; x < 120; ++x)
      if (mask.at(x, y)) pts.push_back({x, y});
  double mx = 0, my = 0;
  for (auto& p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= pts.size();
  my /= pts.size();
  double sxx = 0, sxy = 0, syy = 0;
  for (auto& p : pts) {
    sxx += (p.x - mx) * (p.x - mx);
    sxy += (p.x - mx) * (p.y - my);
    syy += (p.y - my) * (p.y - my);
  }
  const double tr = sxx + syy, det = sxx * syy - sxy * sxy;
  const double lambda = tr / 2 + std::sqrt(std::max(0.0, tr * tr / 4 - det));
  double ax = 1.0, ay = 0.0;
  if (std::abs(sxy) > 1e-12) {
    ax = lambda - syy;
    ay = sxy;
    const double n = std::hypot(ax, ay);
    ax /= n;
    ay /= n;
  } else if (syy > sxx) {
    ax = 0.0;
    ay = 1.0;
  }
  size_t lo = 0, hi = 0;
  double lop = 1e18, hip = -1e18;
  for (size_t i = 0; i < pts.size(); ++i) {
    const double proj = (pts[i].x - mx) * ax + (pts[i].y - my) * ay;
    if (proj < lop) {
      lop = proj;
      lo = i;
    }
    if (proj > hip) {
      hip = proj;
      hi = i;
    }
  }
  double c0x = pts[lo].x, c0y = pts[lo].y, c1x = pts[hi].x, c1y = pts[hi].y;
  std::vector<int> assign(pts.size(), 0);
  for (int iter = 0; iter < 1000; ++iter) {
    bool changed = false;
    for (size_t i = 0; i < pts.size(); ++i) {
      const double d0 = (pts[i].x - c0x) * (pts[i].x - c0x) + (pts[i].y - c0y) * (pts[i].y - c0y);
      const double d1 = (pts[i].x - c1x) * (pts[i].x - c1x) + (pts[i].y - c1y) * (pts[i].y - c1y);
      const int a = d1 < d0 ? 1 : 0;
      if (assign[i] != a) {
        assign[i] = a;
        changed = true;
      }
    }
    double s0x = 0, s0y = 0, s1x = 0, s1y = 0;
    int n0 = 0, n1 = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
      if (assign[i] == 0) {
        s0x += pts[i].x;
        s0y += pts[i].y;
        n0++;
      } else {
        s1x += pts[i].x;
        s1y += pts[i].y;
        n1++;
      }
    }
    if (n0) {
      c0x = s0x / n0;
      c0y = s0y / n0;
    }
    if (n1) {
      c1x = s1x / n1;
      c1y = s1y / n1;
    }
    if (!changed && iter > 0) break;
  }

  std::vector<std::vector<PixelCoord>> expected(2);
  for (size_t i = 0; i < pts.size(); ++i) expected[assign[i]].push_back(pts[i]);
  CHECK(clusters[0] == expected[0]);
  CHECK(clusters[1] == expected[1]);
}

TEST_CASE("tight_crop_resize scales a centered square blob uniformly") {
  BinaryImage mask(200, 200, 0);
  std::vector<PixelCoord> cluster;
  for (int y = 75; y < 125; ++y)
    for (int x = 75; x < 125; ++x) {
      mask.at(x, y) = 1;
      cluster.push_back({x, y});
    }
  const auto [out, tf] = tight_crop_resize(mask, cluster, 100);
  CHECK(out.width == 100);
  CHECK(out.height == 100);
  int fg = 0;
  for (auto v : out.data) fg += v;
  CHECK(fg == 100 * 100);  // the blob fills the tight square crop entirely
  CHECK(tf.scale == doctest::Approx(2.0));
}

TEST_CASE("tight_crop_resize pads a tall blob square before resizing") {
  BinaryImage mask(200, 200, 0);
  std::vector<PixelCoord> cluster;
  for (int y = 40; y < 120; ++y)
    for (int x = 90; x < 110; ++x) {  // 20 wide x 80 tall
      mask.at(x, y) = 1;
      cluster.push_back({x, y});
    }
  const auto [out, tf] = tight_crop_resize(mask, cluster, 100);
  CHECK(tf.scale == doctest::Approx(100.0 / 80.0));
  // aspect preserved: the blob occupies ~1/4 of the width, full height
  int fg = 0;
  for (auto v : out.data) fg += v;
  CHECK(fg == doctest::Approx(100 * 25).epsilon(0.05));
  for (auto v : out.data) CHECK(v <= 1);  // strictly binary
}

TEST_CASE("crop transform round-trips keypoints within one source pixel") {
  BinaryImage mask(300, 240, 0);
  std::vector<PixelCoord> cluster;
  for (int y = 51; y < 171; ++y)
    for (int x = 33; x < 123; ++x) {
      mask.at(x, y) = 1;
      cluster.push_back({x, y});
    }
  const auto [out, tf] = tight_crop_resize(mask, cluster, 100);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> dx(33.0, 122.0), dy(51.0, 170.0);
  for (int i = 0; i < 500; ++i) {
    const Point2 p{dx(rng), dy(rng)};
    const Point2 back = tf.to_frame(tf.to_output(p));
    CHECK(std::abs(back.x - p.x) <= 1.0);
    CHECK(std::abs(back.y - p.y) <= 1.0);
  }
}

TEST_CASE("augment_rotation at angle 0 is the identity") {
  thtest::SampleStream stream(31);
  const auto synth = stream.next();
  const Sample out = augment_rotation(synth.sample, 0.0);
  CHECK(out.image == synth.sample.image);
  CHECK(out.keypoints.wrists[0] == synth.sample.keypoints.wrists[0]);
}

TEST_CASE("augment_rotation at 360 degrees restores keypoints within 1e-6 px") {
  thtest::SampleStream stream(32);
  const auto synth = stream.next();
  const Sample out = augment_rotation(synth.sample, 360.0);
  for (int f = 0; f < kNumFingers; ++f) {
    if (!synth.sample.keypoints.fingertips[f]) continue;
    CHECK(std::abs(out.keypoints.fingertips[f]->x - synth.sample.keypoints.fingertips[f]->x) <
          1e-6);
    CHECK(std::abs(out.keypoints.fingertips[f]->y - synth.sample.keypoints.fingertips[f]->y) <
          1e-6);
  }
}

TEST_CASE("augment_rotation by 90 degrees maps keypoints by the rotation formula") {
  thtest::SampleStream stream(33, 0.0);
  const auto synth = stream.next();
  const Sample out = augment_rotation(synth.sample, 90.0);
  const double cx = 49.5, cy = 49.5;
  for (int f = 0; f < kNumFingers; ++f) {
    if (!synth.sample.keypoints.fingertips[f]) continue;
    const Point2& p = *synth.sample.keypoints.fingertips[f];
    // 90 degrees: cos=0, sin=1 -> (cx + (y-cy), cy - (x-cx))
    const Point2 expected{cx + (p.y - cy), cy - (p.x - cx)};
    CHECK(out.keypoints.fingertips[f]->x == doctest::Approx(expected.x).epsilon(1e-9));
    CHECK(out.keypoints.fingertips[f]->y == doctest::Approx(expected.y).epsilon(1e-9));
  }
}

TEST_CASE("augment_rotation signals keypoints leaving the frame") {
  Sample s;
  s.image = BinaryImage(100, 100, 0);
  for (int y = 0; y < 100; ++y)
    for (int x = 0; x < 100; ++x) s.image.at(x, y) = 1;
  s.gesture = GestureClass(1);
  s.keypoints.fingertips[kThumb] = Point2{99, 1};  // far corner leaves under rotation
  s.keypoints.wrists = {Point2{50, 80}, Point2{60, 80}};
  CHECK_THROWS_AS(augment_rotation(s, 45.0), PreprocessError);
}

TEST_CASE("augment_rotation preserves labels and visibility") {
  thtest::SampleStream stream(34);
  const auto vocab = GestureVocabulary::default_vocabulary();
  for (int i = 0; i < 10; ++i) {
    const auto synth = stream.next();
    Sample out;
    try {
      out = augment_rotation(synth.sample, 15.0);
    } catch (const PreprocessError&) {
      continue;  // keypoint clipped; rejection is the documented behaviour
    }
    CHECK(out.gesture == synth.sample.gesture);
    CHECK(out.handedness == synth.sample.handedness);
    CHECK(out.keypoints.visibility() == synth.sample.keypoints.visibility());
    for (auto v : out.image.data) CHECK(v <= 1);
  }
}

TEST_CASE("augment_forearm fraction semantics and monotonicity") {
  thtest::SampleStream stream(35, 0.0);
  const auto synth = stream.next();
  const Sample& s = synth.sample;

  const Sample cut0 = augment_forearm(s, 0.0);
  // nothing below the wrist line survives at fraction 0
  const Point2& w0 = s.keypoints.wrists[0];
  const Point2& w1 = s.keypoints.wrists[1];
  const double wy = (w0.y + w1.y) / 2.0;
  for (int y = static_cast<int>(wy) + 2; y < 100; ++y)
    for (int x = 0; x < 100; ++x) CHECK(cut0.image.at(x, y) == 0);

  // keypoints unchanged
  CHECK(cut0.keypoints.wrists[0] == s.keypoints.wrists[0]);
  CHECK(cut0.keypoints.wrists[1] == s.keypoints.wrists[1]);

  // monotone foreground count across the ten default fractions
  long prev = -1;
  for (int i = 0; i < 10; ++i) {
    const Sample cut = augment_forearm(s, i / 10.0);
    long fg = 0;
    for (auto v : cut.image.data) fg += v;
    CHECK(fg >= prev);
    prev = fg;
  }

  // fraction at the maximum extent changes nothing
  const Sample cut1 = augment_forearm(s, 1.0);
  CHECK(cut1.image == s.image);
}

TEST_CASE("default augmentation spec has ten forearm lengths") {
  const auto spec = AugmentationSpec::defaults();
  CHECK(spec.forearm_fractions.size() == 10);
  CHECK(spec.forearm_fractions.front() == 0.0);
  CHECK(spec.forearm_fractions.back() == doctest::Approx(0.9));
  CHECK(!spec.rotation_angles.empty());
}
