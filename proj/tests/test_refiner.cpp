#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "test_util.hpp"
#include "thermohand/heatmap.hpp"
#include "thermohand/refine.hpp"

using namespace thermohand;

namespace {

RawDetections decode_sample(const SynthSample& synth, const GestureVocabulary& vocab,
                            const HeatmapConfig& cfg) {
  const FingerMask mask = synth.sample.keypoints.visibility();
  const auto stack = encode_keypoints(synth.sample.keypoints, mask, cfg);
  RawDetections raw;
  raw.gesture = synth.sample.gesture;
  raw.handedness = synth.sample.handedness;
  for (const auto& det : decode_fingertips(stack, mask))
    raw.fingertips[det.finger] = {det.pos, det.score};
  auto [w1, w2] = decode_wrists(stack, DecodeConfig{});
  raw.wrists = {w1, w2};
  return raw;
}

}  // namespace

TEST_CASE("origin selection follows the documented chirality rule") {
  const std::array<Point2, 2> wrists{Point2{10, 40}, Point2{30, 40}};
  const std::vector<Point2> tips{{20, 10}};  // centroid straight up from the midpoint

  CHECK(select_origin_wrist(wrists, tips, Handedness::Right) == 0);  // (10,40)
  CHECK(select_origin_wrist(wrists, tips, Handedness::Left) == 1);   // (30,40)
}

TEST_CASE("origin selection throws on a collinear centroid") {
  const std::array<Point2, 2> wrists{Point2{10, 40}, Point2{30, 40}};
  const std::vector<Point2> tips{{25, 40}};  // on the wrist line
  CHECK_THROWS_AS(select_origin_wrist(wrists, tips, Handedness::Right), DegenerateGeometry);
}

TEST_CASE("finger_angles basic geometry") {
  const Point2 origin{0, 0};
  const Point2 other{10, 0};

  SUBCASE("perpendicular gives 90 degrees") {
    const auto a = finger_angles(origin, other, {{0, -10}});
    CHECK(a[0] == doctest::Approx(90.0));
  }
  SUBCASE("collinear beyond the other wrist gives 0 degrees") {
    const auto a = finger_angles(origin, other, {{25, 0}});
    CHECK(a[0] == doctest::Approx(0.0));
  }
  SUBCASE("opposite direction gives 180 degrees") {
    const auto a = finger_angles(origin, other, {{-5, 0}});
    CHECK(a[0] == doctest::Approx(180.0));
  }
  SUBCASE("zero-length finger vector throws") {
    CHECK_THROWS_AS(finger_angles(origin, other, {{0, 0}}), DegenerateGeometry);
  }
}

TEST_CASE("canonical hands order angles thumb > index > middle > ring > little") {
  thtest::SampleStream stream(202);
  for (int i = 0; i < 200; ++i) {
    const auto synth = stream.next();
    if (synth.sample.gesture.id != 5) continue;  // all five fingers visible
    const auto& kp = synth.sample.keypoints;
    const int origin = synth.thumb_side_wrist;
    std::vector<Point2> tips;
    for (int f = 0; f < kNumFingers; ++f) tips.push_back(*kp.fingertips[f]);
    const auto angles = finger_angles(kp.wrists[origin], kp.wrists[1 - origin], tips);
    for (int f = 0; f + 1 < kNumFingers; ++f) CHECK(angles[f] > angles[f + 1]);
  }
}

TEST_CASE("correct_misorder undoes an adjacent swap on a canonical hand") {
  thtest::SampleStream stream(77);
  const auto vocab = GestureVocabulary::default_vocabulary();
  const HeatmapConfig cfg;
  int tested = 0;
  while (tested < 100) {
    const auto synth = stream.next();
    std::vector<int> visible;
    for (int f = 0; f < kNumFingers; ++f)
      if (synth.sample.keypoints.fingertips[f]) visible.push_back(f);
    if (visible.size() < 2) continue;
    ++tested;

    RawDetections raw = decode_sample(synth, vocab, cfg);
    RawDetections swapped = raw;
    std::swap(swapped.fingertips[visible[0]], swapped.fingertips[visible[1]]);

    const RawDetections fixed = correct_misorder(swapped, vocab);
    CHECK_FALSE(fixed.degenerate_warning);
    for (int f : visible) {
      REQUIRE(fixed.fingertips[f].has_value());
      CHECK(fixed.fingertips[f]->first == raw.fingertips[f]->first);
    }
  }
}

TEST_CASE("correct_misorder is idempotent and label-only") {
  thtest::SampleStream stream(88);
  const auto vocab = GestureVocabulary::default_vocabulary();
  const HeatmapConfig cfg;
  for (int i = 0; i < 100; ++i) {
    const auto synth = stream.next();
    const RawDetections raw = decode_sample(synth, vocab, cfg);
    const RawDetections once = correct_misorder(raw, vocab);
    const RawDetections twice = correct_misorder(once, vocab);

    std::vector<Point2> before, after;
    for (int f = 0; f < kNumFingers; ++f) {
      if (raw.fingertips[f]) before.push_back(raw.fingertips[f]->first);
      if (once.fingertips[f]) after.push_back(once.fingertips[f]->first);
    }
    auto key = [](const Point2& p) { return p.y * 1000 + p.x; };
    std::sort(before.begin(), before.end(),
              [&](const Point2& a, const Point2& b) { return key(a) < key(b); });
    std::sort(after.begin(), after.end(),
              [&](const Point2& a, const Point2& b) { return key(a) < key(b); });
    CHECK(before == after);  // multiset of coordinates unchanged

    for (int f = 0; f < kNumFingers; ++f) {
      CHECK(once.fingertips[f].has_value() == twice.fingertips[f].has_value());
      if (once.fingertips[f]) CHECK(once.fingertips[f]->first == twice.fingertips[f]->first);
    }
  }
}

TEST_CASE("correct_misorder restores random permutations of visible channels") {
  thtest::SampleStream stream(404);
  const auto vocab = GestureVocabulary::default_vocabulary();
  const HeatmapConfig cfg;
  std::mt19937_64 perm_rng(11);
  int tested = 0;
  while (tested < 300) {
    const auto synth = stream.next();
    std::vector<int> visible;
    for (int f = 0; f < kNumFingers; ++f)
      if (synth.sample.keypoints.fingertips[f]) visible.push_back(f);
    if (visible.size() < 2) continue;
    ++tested;

    const RawDetections raw = decode_sample(synth, vocab, cfg);
    RawDetections shuffled = raw;
    std::vector<int> perm = visible;
    std::shuffle(perm.begin(), perm.end(), perm_rng);
    for (size_t i = 0; i < visible.size(); ++i)
      shuffled.fingertips[visible[i]] = raw.fingertips[perm[i]];

    const RawDetections fixed = correct_misorder(shuffled, vocab);
    for (int f : visible) CHECK(fixed.fingertips[f]->first == raw.fingertips[f]->first);
  }
}

TEST_CASE("single visible finger passes through unchanged") {
  const auto vocab = GestureVocabulary::default_vocabulary();
  RawDetections raw;
  raw.gesture = GestureClass(1);  // thumb only
  raw.handedness = Handedness::Right;
  raw.fingertips[kThumb] = {Point2{12, 9}, 0.9};
  raw.wrists = {Point2{10, 30}, Point2{20, 30}};
  const RawDetections out = correct_misorder(raw, vocab);
  CHECK(out.fingertips[kThumb]->first == Point2{12, 9});
  CHECK_FALSE(out.degenerate_warning);
}

TEST_CASE("degenerate geometry passes through with a warning") {
  const auto vocab = GestureVocabulary::default_vocabulary();
  RawDetections raw;
  raw.gesture = GestureClass(6);  // thumb + index
  raw.handedness = Handedness::Right;
  raw.fingertips[kThumb] = {Point2{12, 30}, 0.9};
  raw.fingertips[kIndex] = {Point2{18, 30}, 0.9};  // centroid on the wrist line
  raw.wrists = {Point2{10, 30}, Point2{20, 30}};
  const RawDetections out = correct_misorder(raw, vocab);
  CHECK(out.degenerate_warning);
  CHECK(out.fingertips[kThumb]->first == raw.fingertips[kThumb]->first);
  CHECK(out.fingertips[kIndex]->first == raw.fingertips[kIndex]->first);
}

TEST_CASE("the corrected assignment is invariant under rigid rotation") {
  thtest::SampleStream stream(909, 0.0);
  const auto vocab = GestureVocabulary::default_vocabulary();
  const HeatmapConfig cfg;
  const Point2 center{49.5, 49.5};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> angle_dist(-180.0, 180.0);

  int tested = 0;
  while (tested < 60) {
    const auto synth = stream.next();
    std::vector<int> visible;
    for (int f = 0; f < kNumFingers; ++f)
      if (synth.sample.keypoints.fingertips[f]) visible.push_back(f);
    if (visible.size() < 2) continue;
    ++tested;

    RawDetections raw = decode_sample(synth, vocab, cfg);
    // scramble labels deterministically, then rotate every point rigidly
    RawDetections scrambled = raw;
    std::vector<int> perm = visible;
    std::shuffle(perm.begin(), perm.end(), rng);
    for (size_t i = 0; i < visible.size(); ++i)
      scrambled.fingertips[visible[i]] = raw.fingertips[perm[i]];

    const double rad = angle_dist(rng) * M_PI / 180.0;
    auto rot = [&](const Point2& p) {
      const double dx = p.x - center.x, dy = p.y - center.y;
      return Point2{center.x + std::cos(rad) * dx + std::sin(rad) * dy,
                    center.y - std::sin(rad) * dx + std::cos(rad) * dy};
    };
    RawDetections rotated = scrambled;
    for (int f = 0; f < kNumFingers; ++f)
      if (rotated.fingertips[f]) rotated.fingertips[f]->first = rot(rotated.fingertips[f]->first);
    rotated.wrists = {rot(scrambled.wrists[0]), rot(scrambled.wrists[1])};

    const RawDetections fixed = correct_misorder(scrambled, vocab);
    const RawDetections fixed_rot = correct_misorder(rotated, vocab);
    for (int f : visible) {
      const Point2 expected = rot(fixed.fingertips[f]->first);
      CHECK(fixed_rot.fingertips[f]->first.x == doctest::Approx(expected.x).epsilon(1e-9));
      CHECK(fixed_rot.fingertips[f]->first.y == doctest::Approx(expected.y).epsilon(1e-9));
    }
  }
}

TEST_CASE("refine composes decode, correction, and coordinate mapping") {
  thtest::SampleStream stream(321);
  const auto vocab = GestureVocabulary::default_vocabulary();
  const HeatmapConfig cfg;
  const DecodeConfig dec;
  for (int i = 0; i < 60; ++i) {
    const auto synth = stream.next();
    const Sample& s = synth.sample;
    const FingerMask mask = s.keypoints.visibility();
    const auto stack = encode_keypoints(s.keypoints, mask, cfg);

    std::array<double, kNumGestures> probs{};
    probs[s.gesture.index()] = 1.0;
    const double hprob = s.handedness == Handedness::Right ? 1.0 : 0.0;

    const RefineResult res = refine(stack, probs, hprob, vocab, cfg, dec);
    CHECK(res.gesture == s.gesture);
    CHECK(res.handedness == s.handedness);
    CHECK_FALSE(res.degenerate_warning);
    for (int f = 0; f < kNumFingers; ++f) {
      CHECK(res.keypoints.fingertips[f].has_value() == mask[f]);
      if (mask[f])
        CHECK(distance(*res.keypoints.fingertips[f], *s.keypoints.fingertips[f]) <= 1.12);
    }
    // wrists recovered as an unordered pair
    const double straight = distance(res.keypoints.wrists[0], s.keypoints.wrists[0]) +
                            distance(res.keypoints.wrists[1], s.keypoints.wrists[1]);
    const double crossed = distance(res.keypoints.wrists[0], s.keypoints.wrists[1]) +
                           distance(res.keypoints.wrists[1], s.keypoints.wrists[0]);
    CHECK(std::min(straight, crossed) <= 2 * 1.12);
  }
}

TEST_CASE("refine tie rules: uniform gesture -> lowest id, handedness 0.5 -> Right") {
  const auto vocab = GestureVocabulary::default_vocabulary();
  const HeatmapConfig cfg;
  thtest::SampleStream stream(11);
  SynthSample synth = stream.next();
  while (synth.sample.gesture.id != 1 || synth.sample.handedness != Handedness::Right)
    synth = stream.next();
  const auto stack =
      encode_keypoints(synth.sample.keypoints, synth.sample.keypoints.visibility(), cfg);

  std::array<double, kNumGestures> uniform{};
  uniform.fill(0.1);
  const RefineResult res = refine(stack, uniform, 0.5, vocab, cfg, DecodeConfig{});
  CHECK(res.gesture.id == 1);
  CHECK(res.handedness == Handedness::Right);
}

TEST_CASE("refine validates its probability inputs") {
  const HeatmapConfig cfg;
  const auto vocab = GestureVocabulary::default_vocabulary();
  HeatmapStack stack(50, 6);
  std::array<double, kNumGestures> probs{};
  probs[0] = 0.7;  // sums to 0.7
  CHECK_THROWS_AS(refine(stack, probs, 0.5, vocab, cfg, DecodeConfig{}), CodecError);
  probs[1] = 0.3;
  CHECK_THROWS_AS(refine(stack, probs, 1.5, vocab, cfg, DecodeConfig{}), CodecError);
}
