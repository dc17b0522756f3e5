#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "test_util.hpp"
#include "thermohand/refine.hpp"
#include "thermohand/synthgen.hpp"

using namespace thermohand;
namespace fs = std::filesystem;

TEST_CASE("generated samples validate and keep the angle ordering") {
  thtest::SampleStream stream(1001);
  const auto vocab = GestureVocabulary::default_vocabulary();
  for (int i = 0; i < 200; ++i) {
    const auto synth = stream.next();
    CHECK(validate_sample(synth.sample, vocab).empty());

    const auto& kp = synth.sample.keypoints;
    std::vector<Point2> tips = kp.visible_points();
    if (tips.size() >= 2) {
      const int o = synth.thumb_side_wrist;
      const auto angles = finger_angles(kp.wrists[o], kp.wrists[1 - o], tips);
      for (size_t a = 0; a + 1 < angles.size(); ++a)
        CHECK(angles[a] - angles[a + 1] >= stream.spec.min_angle_gap_deg);
    }
  }
}

TEST_CASE("generation is deterministic for a fixed seed") {
  const auto vocab = GestureVocabulary::default_vocabulary();
  GeneratorSpec spec;
  std::mt19937_64 user_rng1(5), user_rng2(5);
  const UserParams u1 = sample_user_params(user_rng1);
  const UserParams u2 = sample_user_params(user_rng2);
  std::mt19937_64 rng1(99), rng2(99);
  const auto a = generate_sample(GestureClass(5), Handedness::Right, u1, spec, vocab, rng1);
  const auto b = generate_sample(GestureClass(5), Handedness::Right, u2, spec, vocab, rng2);
  CHECK(a.sample.image == b.sample.image);
  CHECK(a.sample.keypoints.wrists[0] == b.sample.keypoints.wrists[0]);
}

TEST_CASE("keypoints are integer-valued by construction") {
  thtest::SampleStream stream(1002);
  for (int i = 0; i < 50; ++i) {
    const auto synth = stream.next();
    for (const auto& t : synth.sample.keypoints.fingertips)
      if (t) {
        CHECK(t->x == std::floor(t->x));
        CHECK(t->y == std::floor(t->y));
      }
  }
}

TEST_CASE("chirality: origin selection matches the generator thumb side") {
  thtest::SampleStream stream(1003);
  for (int i = 0; i < 400; ++i) {
    const auto synth = stream.next();
    const auto& kp = synth.sample.keypoints;
    const int got = select_origin_wrist(kp.wrists, kp.visible_points(),
                                        synth.sample.handedness);
    CHECK(got == synth.thumb_side_wrist);
  }
}

TEST_CASE("mirroring a right sample yields a valid left sample of the same gesture") {
  const auto vocab = GestureVocabulary::default_vocabulary();
  GeneratorSpec spec;
  std::mt19937_64 user_rng(17);
  const UserParams user = sample_user_params(user_rng);
  std::mt19937_64 rng(0x1234);
  for (int g = 1; g <= kNumGestures; ++g) {
    const auto right = generate_sample(GestureClass(g), Handedness::Right, user, spec, vocab, rng);

    Sample mirrored = right.sample;
    mirrored.handedness = Handedness::Left;
    for (int y = 0; y < 100; ++y)
      for (int x = 0; x < 100; ++x) mirrored.image.at(x, y) = right.sample.image.at(99 - x, y);
    for (auto& t : mirrored.keypoints.fingertips)
      if (t) t->x = 99 - t->x;
    for (auto& w : mirrored.keypoints.wrists) w.x = 99 - w.x;

    CHECK(validate_sample(mirrored, vocab).empty());
    // the chirality rule flips with the label
    const int got = select_origin_wrist(mirrored.keypoints.wrists,
                                        mirrored.keypoints.visible_points(), Handedness::Left);
    CHECK(got == right.thumb_side_wrist);
  }
}

TEST_CASE("generate_dataset writes files, manifest, and a disjoint split") {
  const auto dir = thtest::scratch_dir("synth_dataset");
  GeneratorSpec spec;
  spec.seed = 77;
  spec.users = 2;
  spec.test_users = 1;
  spec.samples_per_gesture_per_hand = 3;
  const auto vocab = GestureVocabulary::default_vocabulary();
  const DatasetManifest manifest = generate_dataset(spec, vocab, dir);

  CHECK(manifest.entries.size() == 2 * 10 * 2 * 3);
  int files = 0;
  for (const auto& e : fs::directory_iterator(fs::path(dir) / "samples"))
    if (e.path().extension() == ".png") files++;
  CHECK(files == 120);

  std::set<int> train_users, test_users;
  for (const auto& e : manifest.entries)
    (e.split == "train" ? train_users : test_users).insert(e.user);
  for (int u : test_users) CHECK(train_users.count(u) == 0);
  CHECK(train_users.size() == 1);
  CHECK(test_users.size() == 1);
}

TEST_CASE("regenerating with the same seed produces a byte-identical manifest") {
  const auto dir1 = thtest::scratch_dir("synth_repeat1");
  const auto dir2 = thtest::scratch_dir("synth_repeat2");
  GeneratorSpec spec;
  spec.seed = 4242;
  spec.users = 2;
  spec.test_users = 1;
  spec.samples_per_gesture_per_hand = 2;
  const auto vocab = GestureVocabulary::default_vocabulary();
  generate_dataset(spec, vocab, dir1);
  generate_dataset(spec, vocab, dir2);

  auto slurp = [](const std::string& p) {
    std::ifstream in(fs::path(p) / "manifest.json", std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  CHECK(slurp(dir1) == slurp(dir2));
}

TEST_CASE("generate_dataset validates its spec") {
  const auto vocab = GestureVocabulary::default_vocabulary();
  GeneratorSpec spec;
  spec.users = 0;
  CHECK_THROWS_AS(generate_dataset(spec, vocab, thtest::scratch_dir("synth_bad")),
                  GenerationError);
}
