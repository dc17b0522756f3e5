#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "thermohand/synthgen.hpp"
#include "thermohand/types.hpp"
#include "thermohand/vocabulary.hpp"

namespace thtest {

/// Fresh scratch directory under the test working directory.
inline std::string scratch_dir(const std::string& name) {
  const std::filesystem::path dir = std::filesystem::path("test_tmp") / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

/// Deterministic stream of generated samples cycling over gestures and hands.
struct SampleStream {
  thermohand::GeneratorSpec spec;
  thermohand::GestureVocabulary vocab = thermohand::GestureVocabulary::default_vocabulary();
  thermohand::UserParams user;
  std::mt19937_64 rng;
  int counter = 0;

  explicit SampleStream(std::uint64_t seed, double rotation_range = 15.0) : rng(seed) {
    spec.seed = seed;
    spec.rotation_range_deg = rotation_range;
    std::mt19937_64 user_rng(seed ^ 0x5eedULL);
    user = thermohand::sample_user_params(user_rng);
  }

  thermohand::SynthSample next() {
    const int g = counter % thermohand::kNumGestures + 1;
    const auto hand = (counter / thermohand::kNumGestures) % 2 == 0
                          ? thermohand::Handedness::Right
                          : thermohand::Handedness::Left;
    ++counter;
    if (counter % 40 == 0) {  // rotate through morphologies as well
      user = thermohand::sample_user_params(rng);
    }
    return thermohand::generate_sample(thermohand::GestureClass(g), hand, user, spec, vocab, rng);
  }
};

}  // namespace thtest
