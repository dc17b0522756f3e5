#pragma once

#include <string>
#include <vector>

#include "thermohand/heatmap.hpp"
#include "thermohand/net/tensor.hpp"
#include "thermohand/synthgen.hpp"
#include "thermohand/types.hpp"
#include "thermohand/vocabulary.hpp"

namespace thermohand {

/// In-memory dataset loaded from a generated directory (manifest.json +
/// samples/<stem>.png/.json).
struct Dataset {
  std::vector<Sample> samples;
  GestureVocabulary vocab = GestureVocabulary::default_vocabulary();

  /// split: "train", "test", or "" for everything.
  static Dataset load(const std::string& dir, const std::string& split);

  std::vector<const Sample*> pointers() const;
};

/// Supervision targets for one batch.
struct TargetBatch {
  net::Tensor gesture_onehot;  // N x classes
  net::Tensor handedness;      // N x 1
  net::Tensor heatmaps;        // N x 6 x 50 x 50 encoded ground truth
};

TargetBatch make_targets(const std::vector<const Sample*>& samples, int from, int count,
                         const GestureVocabulary& vocab, const HeatmapConfig& hm_cfg);

}  // namespace thermohand
