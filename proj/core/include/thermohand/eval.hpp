#pragma once

#include <array>
#include <string>
#include <vector>

#include "thermohand/heatmap.hpp"
#include "thermohand/net/model.hpp"
#include "thermohand/types.hpp"
#include "thermohand/vocabulary.hpp"

namespace thermohand {

struct MatchConfig {
  double radius = 5.0;  // input-resolution pixels
};

struct MatchCounts {
  long tp = 0, fp = 0, fn = 0, tn = 0;

  long total() const { return tp + fp + fn + tn; }
  double recall() const { return tp + fn == 0 ? 0.0 : 100.0 * tp / (tp + fn); }
  double precision() const { return tp + fp == 0 ? 0.0 : 100.0 * tp / (tp + fp); }
  double accuracy() const { return total() == 0 ? 0.0 : 100.0 * (tp + tn) / total(); }

  MatchCounts& operator+=(const MatchCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
};

struct KeypointMatchResult {
  MatchCounts fingertips;
  MatchCounts wrists;
};

/// Slot-based keypoint matching. Per finger slot: TP when both visible within
/// radius; a distance miss counts once as FP and once as FN; visibility
/// disagreements count FP (spurious) or FN (missed); both hidden is TN.
/// Wrists are matched as an unordered pair by minimal total distance.
KeypointMatchResult match_keypoints(const KeypointSet& pred, const KeypointSet& truth,
                                    const MatchConfig& cfg);

struct SamplePrediction {
  GestureClass gesture;
  Handedness handedness = Handedness::Right;
  KeypointSet keypoints;
  bool keypoints_valid = true;  // false when decoding failed outright
};

struct TaskMetrics {
  double recall = 0.0, precision = 0.0, accuracy = 0.0;  // percent
};

struct MetricsReport {
  TaskMetrics gesture, handedness, fingertips, wrists;
  std::array<double, kNumGestures> per_gesture_accuracy{};
  std::array<std::array<long, kNumGestures>, kNumGestures> confusion{};  // [truth][pred]
  MatchCounts fingertip_counts, wrist_counts;
  long n_samples = 0;
};

/// Aggregates predictions against ground truth. Gesture metrics are
/// macro-averaged over classes present in the truth; handedness over the two
/// sides; keypoint metrics over point slots.
MetricsReport compute_metrics(const std::vector<SamplePrediction>& predictions,
                              const std::vector<const Sample*>& truth, const MatchConfig& cfg);

std::string metrics_to_json(const MetricsReport& r);
void write_metrics_csv(const MetricsReport& r, const std::string& path);
void write_metrics_json(const MetricsReport& r, const std::string& path);
void write_confusion_csv(const MetricsReport& r, const std::string& path);

struct PredictOptions {
  /// true: gesture/handedness-aware refine decode. false: the fixed-threshold
  /// baseline (no gesture mask, no misorder correction).
  bool use_refine = true;
  double baseline_threshold = 0.5;
  int batch_size = 32;
};

/// Runs the network in inference mode over samples and decodes keypoints.
std::vector<SamplePrediction> predict_dataset(net::MultiTaskNet& net,
                                              const std::vector<const Sample*>& samples,
                                              const GestureVocabulary& vocab,
                                              const HeatmapConfig& hm_cfg,
                                              const DecodeConfig& dec_cfg,
                                              const PredictOptions& opts = {});

/// Builds an input tensor from binary images (values {0,1} -> floats).
net::Tensor make_input_batch(const std::vector<const Sample*>& samples, int from, int count);

}  // namespace thermohand
