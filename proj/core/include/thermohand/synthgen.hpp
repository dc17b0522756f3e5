#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermohand/types.hpp"
#include "thermohand/vocabulary.hpp"

namespace thermohand {

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Procedural dataset parameters. Each "user" is a sampled hand-morphology
/// bundle (palm size, finger lengths/widths, wrist width, jitter magnitudes)
/// standing in for inter-subject variation.
struct GeneratorSpec {
  std::uint64_t seed = 1;
  int users = 4;
  int test_users = 1;  // trailing users held out as the test split
  int samples_per_gesture_per_hand = 5;
  double rotation_range_deg = 15.0;
  std::vector<double> forearm_fractions = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  double min_angle_gap_deg = 6.0;  // enforced wrist-line angle gap between adjacent fingers
  std::string out_dir;             // optional; the CLI --out flag overrides
};

/// Per-user hand morphology (canonical right hand, input-resolution units).
struct UserParams {
  double palm_rx = 15.0, palm_ry = 13.0;
  double wrist_width = 20.0;
  double wrist_drop = 0.8;  // wrist line at palm_cy + wrist_drop * palm_ry
  std::array<double, kNumFingers> finger_length{};     // beyond the palm edge
  std::array<double, kNumFingers> finger_halfwidth{};
  std::array<double, kNumFingers> finger_angle_deg{};  // fan directions, thumb widest
  double forearm_halfwidth = 11.0;
  double angle_jitter_deg = 2.5;  // per-sample jitter magnitudes
  double length_jitter = 2.0;
  double center_jitter = 5.0;
};

UserParams sample_user_params(std::mt19937_64& rng);

struct SynthSample {
  Sample sample;
  int thumb_side_wrist = 0;  // index into sample.keypoints.wrists
};

/// Renders one binary hand silhouette with exact integer keypoints. The
/// geometry is resampled (bounded retries) until the canonical constraints
/// hold: strictly decreasing wrist-line angles thumb -> little with the
/// configured gap (also after quantization to heatmap pixels), a robust
/// chirality margin, and well-separated in-frame keypoints.
SynthSample generate_sample(GestureClass gesture, Handedness hand, const UserParams& user,
                            const GeneratorSpec& spec, const GestureVocabulary& vocab,
                            std::mt19937_64& rng);

struct ManifestEntry {
  std::string stem;  // file stem under samples/
  int user = 0;
  int gesture = 1;
  Handedness hand = Handedness::Right;
  std::string split;  // "train" | "test"
  std::uint64_t seed = 0;
};

struct DatasetManifest {
  std::uint64_t seed = 0;
  int users = 0;
  int test_users = 0;
  int samples_per_gesture_per_hand = 0;
  std::vector<ManifestEntry> entries;

  std::vector<const ManifestEntry*> split_entries(const std::string& split) const;
};

/// Writes PNG + annotation JSON per sample plus manifest.json (per-gesture /
/// per-hand counts and a user-disjoint train/test split) into out_dir.
DatasetManifest generate_dataset(const GeneratorSpec& spec, const GestureVocabulary& vocab,
                                 const std::string& out_dir);

std::string manifest_to_json(const DatasetManifest& m, const GestureVocabulary& vocab);
DatasetManifest manifest_from_json(const std::string& text);

/// Deterministic per-sample seed stream.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0, std::uint64_t d = 0);

}  // namespace thermohand
